#pragma once

#include "affectsense/errors.hpp"
#include "affectsense/experiment.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace affectsense {

class EmptyInput : public Error {
  public:
    using Error::Error;
};

class LengthMismatch : public Error {
  public:
    using Error::Error;
};

/// (1/n) * sum |P - T|.
double participant_mae(std::span<const int> preds, std::span<const int> truths);
/// Unweighted mean over participants.
double overall_mae(std::span<const double> per_participant);
/// Arithmetic mean of a participant's true scores.
double mean_truth(std::span<const int> truths);
/// mae / mean_truth * 100.
double relative_error(double mae, double mean_truth);

/// Table-1-style row for one shot level.
struct ItemRow {
    int shot{0};
    std::array<double, 10> item_mae{}; // macro over participants
    double mean{0};                    // of the 10 item MAEs
    double std{0};                     // population std of the 10 item MAEs
    double positive{0};
    double negative{0};
    double overall_mae{0}; // macro over participants of each participant's all-item MAE
    double epsilon{0};     // macro relative error, percent
    int participants{0};
    long records{0};
    long excluded_records{0}; // errored records
    long undecided{0};        // item predictions of -1
};

/// Per participant and shot level.
struct ParticipantRow {
    std::string participant_id;
    int shot{0};
    std::array<double, 10> item_mae{};
    double mae{0};
    double mean_truth{0};
    double epsilon{0};
    double positive{0};
    double negative{0};
    long records{0};
};

struct CurvePoint {
    std::string series; // item key, "mean", "positive", "negative" or "overall"
    int shot{0};
    double mae{0};
};

struct MetricsReport {
    std::vector<ItemRow> rows;                 // ascending shot
    std::vector<ParticipantRow> participants;  // by participant, then shot
    std::vector<CurvePoint> curves;            // by series, then shot
    long total_records{0};
    long excluded_records{0};

    const ItemRow* row(int shot) const;
};

/// Throws EmptyInput when no record has shot level k.
ItemRow item_table(std::span<const RunRecord> records, int k);
std::vector<CurvePoint> learning_curve(std::span<const RunRecord> records);
MetricsReport compute_metrics(std::span<const RunRecord> records);

/// metrics.csv, curves.csv, pos_neg.csv, participants.csv, summary.md and, with `svg`, curves.svg.
void write_report(const std::filesystem::path& dir, const MetricsReport& report, bool svg);
std::string metrics_csv(const MetricsReport& report);
std::string curves_svg(const MetricsReport& report);

} // namespace affectsense
