#pragma once

#include "affectsense/backend.hpp"
#include "affectsense/config.hpp"
#include "affectsense/prompt.hpp"
#include "affectsense/textualize.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affectsense {

class WrongWeekCount : public Error {
  public:
    using Error::Error;
};

inline constexpr int kTrainWeeks = 10;
inline constexpr int kTestWeeks = 7;

struct SplitPlan {
    std::string participant_id;
    int repeat{0};
    std::vector<int> train_week_ids; // ascending
    std::vector<int> test_week_ids;  // ascending
    std::uint64_t seed{0};           // derived seed this plan was drawn with
};

/// One plan per repeat. Each repeat shuffles the 17 weeks with a seed derived from
/// (seed, participant, repeat). Throws WrongWeekCount unless there are 17 distinct weeks.
std::vector<SplitPlan> make_splits(const std::string& participant_id, std::vector<int> weeks, int repeats,
                                   std::uint64_t seed);

struct ShotSchedule {
    std::vector<int> order; // permutation of the train weeks
    /// The first k weeks of `order`.
    std::vector<int> shots(int k) const;
};

ShotSchedule make_shot_schedule(const std::vector<int>& train_weeks, std::uint64_t seed);

// ---- labels ------------------------------------------------------------------

struct LabelTable {
    std::map<int, AffectScores> complete;
    std::vector<std::string> dropped; // "week 4: missing ashamed"
};

/// `week_id,active,...,afraid` with values 1-5. Rows with empty or out-of-range cells are dropped
/// and reported; a wrong header throws SchemaMismatch.
LabelTable parse_labels_csv(std::string_view text);
LabelTable load_labels(const std::filesystem::path& path);
std::string labels_csv_header();

// ---- run records -------------------------------------------------------------

struct RecordKey {
    std::string participant_id;
    int repeat{0};
    int shot_count{0};
    int test_week{0};
    auto operator<=>(const RecordKey&) const = default;
};

struct RunRecord {
    std::string participant_id;
    int repeat{0};
    int shot_count{0};
    int test_week{0};
    std::vector<int> shot_weeks; // embedded examples in prompt order
    std::optional<AffectScores> predicted;
    AffectScores truth;
    std::string prompt_digest;
    std::string error;      // empty when the prediction parsed
    std::string error_kind; // transport, auth, budget, parse, prompt

    RecordKey key() const { return {participant_id, repeat, shot_count, test_week}; }
    bool ok() const { return error.empty() && predicted.has_value(); }
    /// Failures of the call itself (as opposed to the answer) are retried on resume.
    bool call_failed() const { return error_kind == "transport" || error_kind == "auth" || error_kind == "budget"; }
};

std::string record_to_json(const RunRecord& r);
RunRecord record_from_json(std::string_view line);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

// ---- participant data ----------------------------------------------------------

struct ParticipantWeeks {
    std::string participant_id;
    std::map<int, WeeklyDescription> descriptions; // weeks with 7 days of features
    LabelTable labels;
    /// Weeks having both a description and complete labels.
    std::vector<int> usable_weeks() const;
};

/// Loads the feature store when present, otherwise extracts features from the raw data and
/// writes the store. Then renders one description per study week.
ParticipantWeeks load_participant_weeks(const RunConfig& config, const std::string& participant_id);

/// Daily feature vectors for the study window, extracted from raw sensor files.
std::vector<DailyFeatureVector> extract_study_features(const RunConfig& config, const std::string& participant_id,
                                                       IngestReport* report = nullptr);

/// Prompt for one test week; zero-shot when k = 0. Examples keep schedule order.
Prompt build_week_prompt(const ParticipantWeeks& data, const ShotSchedule& schedule, int k, int test_week,
                         bool cot, bool allow_undecided);

// ---- running -----------------------------------------------------------------

struct RunSummary {
    std::vector<RunRecord> records; // canonical order
    long new_calls{0};
    long reused_records{0};
    std::vector<std::string> skipped_participants; // "p03: 16 usable weeks"
    std::vector<std::string> dropped_weeks;        // "p01 week 4: missing ashamed"
    long error_records{0};

    int exit_code() const { return error_records > 0 ? 2 : 0; }
};

/// Runs the participant x repeat x shot-count x test-week matrix into config.run_dir():
/// records.jsonl and transcripts.jsonl, rewritten in canonical order at the end. Records already
/// present are reused unless their call failed. Metrics and reports are written under report/.
RunSummary run_experiment(const RunConfig& config, Backend& backend);
RunSummary run_experiment(const RunConfig& config, LlmClient& client);

/// Lower median of the decided values per item; -1 when every sample is undecided.
AffectScores aggregate_samples(const std::vector<AffectScores>& samples);

} // namespace affectsense
