#pragma once

#include "affectsense/backend.hpp"
#include "affectsense/errors.hpp"
#include "affectsense/features.hpp"
#include "affectsense/time_util.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace affectsense {

inline constexpr int kStudyWeeks = 17;

struct StudyConfig {
    Date start_date{};
    TzOffset timezone{};
    std::map<std::string, TzOffset> timezone_overrides;

    TzOffset tz_for(const std::string& participant) const {
        auto it = timezone_overrides.find(participant);
        return it == timezone_overrides.end() ? timezone : it->second;
    }
    /// First day of a 1-based study week.
    Date week_start(int week_id) const { return add_days(start_date, (week_id - 1) * 7); }
};

struct BackendConfig {
    std::string kind{"oracle"}; // http, mock, oracle
    std::string endpoint;
    std::string model;
    std::string credential_env;
    double rpm{10};
    int max_in_flight{4};
    long max_calls{0};
    std::filesystem::path fixtures;
};

struct ExperimentConfig {
    std::string run_id{"run"};
    int repeats{3};
    std::uint64_t seed{42};
    int shot_min{0};
    int shot_max{10};
    bool cot{false};
    bool allow_undecided{false};
    int samples{1};
};

struct RunConfig {
    std::vector<std::string> participants;
    std::filesystem::path data_root;
    std::filesystem::path labels_root;
    std::filesystem::path output_root;
    std::filesystem::path app_categories; // optional
    std::filesystem::path features_root;
    StudyConfig study;
    FeatureParams features;
    BackendConfig backend;
    GenParams gen;
    ExperimentConfig experiment;
    bool transcript_full_prompt{true};

    std::filesystem::path run_dir() const { return output_root / "runs" / experiment.run_id; }
    std::filesystem::path labels_file(const std::string& pid) const { return labels_root / (pid + ".csv"); }
    std::filesystem::path feature_file(const std::string& pid) const { return features_root / (pid + ".csv"); }
};

/// Reads a JSON config. Relative paths resolve against the config file's directory.
/// Throws ConfigError on unknown backend kinds, bad shot ranges and malformed values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// JSON rendering of a config with paths relative to `base_dir` when they sit below it.
std::string config_to_json(const RunConfig& config, const std::filesystem::path& base_dir);

/// Backend instance described by the config.
std::unique_ptr<Backend> make_backend(const RunConfig& config);
ClientOptions client_options(const RunConfig& config);

} // namespace affectsense
