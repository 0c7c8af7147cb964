#pragma once

#include "affectsense/errors.hpp"
#include "affectsense/geo.hpp"
#include "affectsense/sensor.hpp"
#include "affectsense/time_util.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affectsense {

inline constexpr int kFeatureCount = 77;

enum class Family { Applications, Battery, Calls, Keyboard, Locations, Messages, Screen };
inline constexpr std::array<Family, 7> kAllFamilies = {Family::Applications, Family::Battery,   Family::Calls,
                                                       Family::Keyboard,     Family::Locations, Family::Messages,
                                                       Family::Screen};

enum class Unit {
    Count,
    Minutes,
    Meters,
    Kmh,
    Seconds,
    Characters,
    Dimensionless,
    Percent,
    SquareMeters,
    SquaredKmh,
};

struct FeatureInfo {
    int id;
    std::string_view name;
    Family family;
    Unit unit;
};

/// The 77 daily features, index i holds id i+1.
std::span<const FeatureInfo, kFeatureCount> feature_catalog();
const FeatureInfo& feature_info(int id);

std::string_view to_string(Family f);
/// Lower-case noun used in sentences ("No call data was recorded.").
std::string_view family_noun(Family f);
std::string_view to_string(Unit u);
/// Word appended after a value in descriptions; empty for counts and dimensionless values.
std::string_view unit_suffix(Unit u);
/// First and last feature id of a family.
std::pair<int, int> family_range(Family f);
SensorKind family_sensor(Family f);

using FeatureValues = std::array<std::optional<double>, kFeatureCount>;

struct DailyFeatureVector {
    std::string participant_id;
    Date date{};
    FeatureValues values{};

    const std::optional<double>& get(int id) const { return values[static_cast<std::size_t>(id - 1)]; }
    std::optional<double>& at(int id) { return values[static_cast<std::size_t>(id - 1)]; }
    bool family_missing(Family f) const;
};

struct FeatureParams {
    double eps_m{100.0};
    int min_samples{5};
    double stationary_kmh{1.0};
    std::int64_t keyboard_session_gap_ms{5000};
};

/// Local-day bounds; `end_ms` is exclusive (next local midnight).
struct DayWindow {
    std::int64_t start_ms{0};
    std::int64_t end_ms{0};

    static DayWindow of(Date d, TzOffset tz) {
        const auto s = day_start_ms(d, tz);
        return {s, s + kDayMs};
    }
};

template <std::size_t N>
using FamilyValues = std::array<std::optional<double>, N>;

/// Items 1-20. Empty input gives zeros.
FamilyValues<20> app_features(std::span<const SensorEvent> episodes);
/// Items 21-22. Empty input gives missing values.
FamilyValues<2> battery_features(std::span<const SensorEvent> events);
/// Items 23-37. Mean and mode of a direction without calls are missing.
FamilyValues<15> call_features(std::span<const SensorEvent> events);
/// Items 65-70. Empty input gives missing values.
FamilyValues<6> message_features(std::span<const SensorEvent> events);
/// Items 38-44. Item 40 counts deltas <= -2.
FamilyValues<7> keyboard_features(std::span<const SensorEvent> events, std::int64_t session_gap_ms = 5000);
/// Items 71-77. Episodes still open at the end of the window are clipped there.
FamilyValues<7> screen_features(std::span<const SensorEvent> events, DayWindow day);

class InsufficientData : public Error {
  public:
    using Error::Error;
};

struct Fix {
    std::int64_t t{0};
    LatLon pos;
    std::optional<double> speed_mps;
};

std::vector<Fix> to_fixes(std::span<const SensorEvent> location_events);

struct LocationCluster {
    int id{0};
    LatLon centroid;
    std::int64_t dwell_ms{0};
    std::size_t size{0};

    double dwell_minutes() const { return static_cast<double>(dwell_ms) / static_cast<double>(kMinuteMs); }
};

struct LocationClustering {
    static constexpr int kNoise = -1;
    static constexpr int kMoving = -2;

    std::vector<Fix> fixes;
    std::vector<double> speed_kmh;    // measured or derived, per fix
    std::vector<std::int64_t> gap_ms; // time attributed to each fix (to the next fix; 0 for the last)
    std::vector<int> assignment;      // cluster id, kNoise or kMoving
    std::vector<LocationCluster> clusters;
    std::optional<int> home_cluster;

    std::int64_t tracked_ms() const { return fixes.empty() ? 0 : fixes.back().t - fixes.front().t; }
    std::int64_t moving_ms() const;
    std::int64_t noise_ms() const;
    std::size_t noise_count() const;
};

/// Splits fixes into moving/stationary by speed, then runs DBSCAN (haversine metric) over the
/// stationary ones. Cluster ids follow discovery order; a border point joins the first cluster
/// that reaches it. When `home` is given, the nearest cluster within eps of it becomes the home
/// cluster. Throws InsufficientData for fewer than two fixes.
LocationClustering cluster_locations(std::span<const Fix> fixes, const FeatureParams& params,
                                     std::optional<LatLon> home = std::nullopt);

/// Items 45-64 from a day's clustering.
FamilyValues<20> location_features(const LocationClustering& clustering, bool home_known);

/// Centroid of the cluster with the greatest night-time (00:00-06:00 local) dwell across the whole
/// window; nullopt when no stationary night-time dwell was observed.
std::optional<LatLon> detect_home(std::span<const SensorEvent> window_locations, TzOffset tz,
                                  const FeatureParams& params);

/// Sensor streams already sliced to one day.
struct DayEvents {
    std::array<EventStream, 7> by_kind;
    EventStream& operator[](SensorKind k) { return by_kind[static_cast<std::size_t>(k)]; }
    const EventStream& operator[](SensorKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
};

struct DayContext {
    std::string participant_id;
    Date date{};
    TzOffset tz{};
    FeatureParams params{};
    std::optional<LatLon> home;
};

/// Dispatches to the per-family extractors. A family whose sensor has no events that day is
/// left entirely missing.
DailyFeatureVector extract_daily_features(const DayEvents& day, const DayContext& ctx);

/// Features for every date in [first, first + days) of a cleaned participant.
std::vector<DailyFeatureVector> extract_participant_features(const ParticipantStreams& streams, Date first, int days,
                                                             TzOffset tz, const FeatureParams& params);

// ---- feature store ----------------------------------------------------------

/// `date,f1..f77` with empty cells for missing values.
std::string to_feature_csv(std::span<const DailyFeatureVector> days);
std::vector<DailyFeatureVector> parse_feature_csv(std::string_view text, const std::string& participant_id);
void write_feature_store(const std::filesystem::path& path, std::span<const DailyFeatureVector> days);
std::vector<DailyFeatureVector> read_feature_store(const std::filesystem::path& path);
/// `id,name,family,unit`
std::string catalog_csv();

} // namespace affectsense
