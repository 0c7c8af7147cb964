#include "affectsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace affectsense {

double participant_mae(std::span<const int> preds, std::span<const int> truths) {
    if (preds.size() != truths.size()) throw LengthMismatch("predictions and truths differ in length");
    if (preds.empty()) throw EmptyInput("no observations");
    double sum = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) sum += std::abs(preds[i] - truths[i]);
    return sum / static_cast<double>(preds.size());
}

double overall_mae(std::span<const double> per_participant) {
    if (per_participant.empty()) throw EmptyInput("no participants");
    return std::accumulate(per_participant.begin(), per_participant.end(), 0.0) /
           static_cast<double>(per_participant.size());
}

double mean_truth(std::span<const int> truths) {
    if (truths.empty()) throw EmptyInput("no observations");
    return std::accumulate(truths.begin(), truths.end(), 0.0) / static_cast<double>(truths.size());
}

double relative_error(double mae, double mean_truth) { return mae / mean_truth * 100.0; }

const ItemRow* MetricsReport::row(int shot) const {
    for (const auto& r : rows)
        if (r.shot == shot) return &r;
    return nullptr;
}

namespace {

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Pairs {
    std::vector<int> preds;
    std::vector<int> truths;
};

// Per participant (in first-seen order) and shot level.
ParticipantRow participant_row(const std::string& pid, int k, std::span<const RunRecord> records) {
    ParticipantRow row;
    row.participant_id = pid;
    row.shot = k;
    std::array<Pairs, kItemCount> per_item;
    Pairs all;
    for (const auto& r : records) {
        if (r.participant_id != pid || r.shot_count != k || !r.ok()) continue;
        ++row.records;
        for (std::size_t i = 0; i < kItemCount; ++i) {
            const int p = r.predicted->values[i];
            if (p == kUndecided) continue;
            per_item[i].preds.push_back(p);
            per_item[i].truths.push_back(r.truth.values[i]);
            all.preds.push_back(p);
            all.truths.push_back(r.truth.values[i]);
        }
    }
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < kItemCount; ++i) {
        row.item_mae[i] = per_item[i].preds.empty() ? std::nan("") : participant_mae(per_item[i].preds, per_item[i].truths);
        if (per_item[i].preds.empty()) continue;
        (is_positive(kAllItems[i]) ? pos : neg).push_back(row.item_mae[i]);
    }
    if (!all.preds.empty()) {
        row.mae = participant_mae(all.preds, all.truths);
        row.mean_truth = mean_truth(all.truths);
        row.epsilon = relative_error(row.mae, row.mean_truth);
    } else {
        row.mae = row.mean_truth = row.epsilon = std::nan("");
    }
    row.positive = pos.empty() ? std::nan("") : mean_of(pos);
    row.negative = neg.empty() ? std::nan("") : mean_of(neg);
    return row;
}

std::vector<std::string> participant_order(std::span<const RunRecord> records) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : records)
        if (seen.insert(r.participant_id).second) out.push_back(r.participant_id);
    std::sort(out.begin(), out.end());
    return out;
}

ItemRow make_row(int k, std::span<const RunRecord> records, const std::vector<ParticipantRow>& prow) {
    ItemRow row;
    row.shot = k;
    for (const auto& r : records) {
        if (r.shot_count != k) continue;
        ++row.records;
        if (!r.ok()) {
            ++row.excluded_records;
            continue;
        }
        for (int v : r.predicted->values)
            if (v == kUndecided) ++row.undecided;
    }
    if (row.records == 0) throw EmptyInput("no records at shot level " + std::to_string(k));

    std::vector<double> maes;
    std::vector<double> eps;
    for (std::size_t i = 0; i < kItemCount; ++i) {
        std::vector<double> v;
        for (const auto& p : prow)
            if (p.shot == k && !std::isnan(p.item_mae[i])) v.push_back(p.item_mae[i]);
        row.item_mae[i] = v.empty() ? std::nan("") : overall_mae(v);
    }
    for (const auto& p : prow) {
        if (p.shot != k || std::isnan(p.mae)) continue;
        maes.push_back(p.mae);
        eps.push_back(p.epsilon);
    }
    row.participants = static_cast<int>(maes.size());
    row.overall_mae = maes.empty() ? std::nan("") : overall_mae(maes);
    row.epsilon = eps.empty() ? std::nan("") : overall_mae(eps);

    double sum = 0;
    double pos = 0;
    double neg = 0;
    for (std::size_t i = 0; i < kItemCount; ++i) {
        sum += row.item_mae[i];
        (is_positive(kAllItems[i]) ? pos : neg) += row.item_mae[i];
    }
    row.mean = sum / kItemCount;
    row.positive = pos / 5.0;
    row.negative = neg / 5.0;
    double ss = 0;
    for (double m : row.item_mae) ss += (m - row.mean) * (m - row.mean);
    row.std = std::sqrt(ss / kItemCount);
    return row;
}

std::vector<ParticipantRow> participant_rows(std::span<const RunRecord> records) {
    std::set<int> shots;
    for (const auto& r : records) shots.insert(r.shot_count);
    std::vector<ParticipantRow> out;
    for (const auto& pid : participant_order(records))
        for (int k : shots) out.push_back(participant_row(pid, k, records));
    return out;
}

std::vector<CurvePoint> curves_from(const std::vector<ItemRow>& rows) {
    std::vector<CurvePoint> out;
    for (Item item : kAllItems)
        for (const auto& r : rows)
            out.push_back({std::string(item_key(item)), r.shot, r.item_mae[static_cast<std::size_t>(item)]});
    for (const auto& r : rows) out.push_back({"mean", r.shot, r.mean});
    for (const auto& r : rows) out.push_back({"positive", r.shot, r.positive});
    for (const auto& r : rows) out.push_back({"negative", r.shot, r.negative});
    for (const auto& r : rows) out.push_back({"overall", r.shot, r.overall_mae});
    return out;
}

} // namespace

ItemRow item_table(std::span<const RunRecord> records, int k) {
    std::vector<RunRecord> at_k;
    for (const auto& r : records)
        if (r.shot_count == k) at_k.push_back(r);
    if (at_k.empty()) throw EmptyInput("no records at shot level " + std::to_string(k));
    return make_row(k, at_k, participant_rows(at_k));
}

std::vector<CurvePoint> learning_curve(std::span<const RunRecord> records) {
    return compute_metrics(records).curves;
}

MetricsReport compute_metrics(std::span<const RunRecord> records) {
    MetricsReport report;
    report.participants = participant_rows(records);
    std::set<int> shots;
    for (const auto& r : records) {
        shots.insert(r.shot_count);
        ++report.total_records;
        if (!r.ok()) ++report.excluded_records;
    }
    for (int k : shots) report.rows.push_back(make_row(k, records, report.participants));
    report.curves = curves_from(report.rows);
    return report;
}

} // namespace affectsense
