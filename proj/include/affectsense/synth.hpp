#pragma once

#include "affectsense/config.hpp"
#include "affectsense/prompt.hpp"
#include "affectsense/sensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace affectsense {

/// A feature whose daily value the generator steers toward a label-dependent target.
struct CoupledFeature {
    int id;
    double mean;
    double sd;
};

inline constexpr int kCoupledCount = 5;

/// Unlock episodes (71), missed calls (23), one-character deletions (41), incoming call
/// duration (28, seconds) and total application minutes (12).
const std::array<CoupledFeature, kCoupledCount>& coupled_features();

struct SyntheticProfile {
    std::string participant_id;
    std::uint64_t seed{0};
    std::array<double, kItemCount> centers{}; // per-item label center
    std::array<double, kItemCount> spreads{}; // per-item label spread
    std::array<std::array<double, kItemCount>, kCoupledCount> coupling_matrix{}; // unit-norm rows
    double coupling_strength{1.0};
    double noise_scale{0.25};
};

SyntheticProfile make_profile(const std::string& participant_id, std::uint64_t seed, double coupling_strength,
                              double noise_scale);

struct SyntheticParticipant {
    SyntheticProfile profile;
    std::vector<AffectScores> week_labels;                     // one per week
    std::vector<std::array<double, kCoupledCount>> targets;    // one per day, before clamping
    std::vector<std::array<double, kCoupledCount>> realized;   // what the generated events encode
    std::vector<std::string> clamped;                          // "day 12 f23: target -0.4 clamped to 0"
};

/// Draws the weekly labels and the daily targets. Target = mean + sd * (coupling * C.(a - center) + noise * z).
SyntheticParticipant plan_participant(const SyntheticProfile& profile, int weeks = kStudyWeeks);

/// Raw events of one generated day (UTC clock), grouped by kind.
std::array<EventStream, 7> day_events(const SyntheticParticipant& participant, int day_index, Date date);

/// Package-to-category table used by the generated application events.
std::string synthetic_app_categories_csv();

struct SynthOptions {
    int participants{10};
    std::uint64_t seed{7};
    double coupling{1.0};
    double noise{0.25};
    Date start_date{std::chrono::year{2024}, std::chrono::month{1}, std::chrono::day{8}};
    int weeks{kStudyWeeks};
};

struct FleetReport {
    std::vector<std::string> participants;
    std::vector<std::string> clamped;
    std::size_t files{0};
};

/// Writes data/<pid>/<date>/<kind>.csv, labels/<pid>.csv, app_categories.csv and a config.json
/// set up for the oracle backend under `out`.
FleetReport gen_fleet(const SynthOptions& options, const std::filesystem::path& out);
void write_participant(const SyntheticParticipant& participant, const std::filesystem::path& out, Date start_date);
std::string participant_id_for(int index); // "p01", "p02", ...

} // namespace affectsense
