#pragma once

// Straight-line reference implementations of the daily features, written against the feature
// definitions rather than the library code. Quadratic algorithms are fine here.

#include "affectsense/features.hpp"
#include "affectsense/random.hpp"

#include <optional>
#include <string>

namespace oracle {

using affectsense::DayEvents;
using affectsense::FeatureValues;

struct OracleContext {
    std::int64_t day_start_ms{0};
    double eps_m{100.0};
    int min_samples{5};
    double stationary_kmh{1.0};
    std::int64_t keyboard_gap_ms{5000};
    std::optional<affectsense::LatLon> home;
};

FeatureValues daily_features(const DayEvents& day, const OracleContext& ctx);

/// DBSCAN by brute force: core points via O(n^2) neighbor counts, clusters as connected
/// components of core points numbered by their lowest fix index, border points to the lowest
/// numbered adjacent cluster. -1 noise, -2 moving.
std::vector<int> dbscan_labels(const std::vector<affectsense::Fix>& fixes, const OracleContext& ctx);

double haversine(affectsense::LatLon a, affectsense::LatLon b);

// ---- random small streams ----------------------------------------------------

/// One day of random events for a single kind, at most `max_events` long, sorted, already
/// clipped to [day_start, day_start + 24h).
affectsense::EventStream random_stream(affectsense::SensorKind kind, affectsense::Rng& rng, std::int64_t day_start,
                                       int max_events = 50);

} // namespace oracle
