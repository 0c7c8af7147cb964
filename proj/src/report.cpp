#include "affectsense/csv.hpp"
#include "affectsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace affectsense {

namespace fs = std::filesystem;

namespace {

std::string num(double v, int digits = 4) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string items_header() {
    std::string h;
    for (Item item : kAllItems) h += "," + std::string(item_key(item));
    return h;
}

std::string curves_csv(const MetricsReport& report) {
    std::string out = "series,k,mae\n";
    for (const auto& p : report.curves) out += p.series + "," + std::to_string(p.shot) + "," + num(p.mae) + "\n";
    return out;
}

std::string pos_neg_csv(const MetricsReport& report) {
    std::string out = "participant_id,k,positive_mae,negative_mae\n";
    for (const auto& p : report.participants)
        out += csv::escape(p.participant_id) + "," + std::to_string(p.shot) + "," + num(p.positive) + "," +
               num(p.negative) + "\n";
    return out;
}

std::string participants_csv(const MetricsReport& report) {
    std::string out = "participant_id,k,records" + items_header() + ",mae,mean_truth,epsilon\n";
    for (const auto& p : report.participants) {
        out += csv::escape(p.participant_id) + "," + std::to_string(p.shot) + "," + std::to_string(p.records);
        for (double m : p.item_mae) out += "," + num(m);
        out += "," + num(p.mae) + "," + num(p.mean_truth) + "," + num(p.epsilon, 2) + "\n";
    }
    return out;
}

std::string summary_md(const MetricsReport& report) {
    std::string out = "# Affect prediction results\n\n";
    out += "Records: " + std::to_string(report.total_records) + " (" + std::to_string(report.excluded_records) +
           " excluded for errors)\n\n";
    out += "| Shots |";
    for (Item item : kAllItems) out += " " + std::string(item_name(item)) + " |";
    out += " Mean | Std | Positive | Negative | Overall MAE | Relative error (%) |\n|---|";
    for (std::size_t i = 0; i < kItemCount + 6; ++i) out += "---|";
    out += "\n";
    for (const auto& r : report.rows) {
        out += "| " + std::to_string(r.shot) + " |";
        for (double m : r.item_mae) out += " " + num(m, 2) + " |";
        out += " " + num(r.mean, 2) + " | " + num(r.std, 2) + " | " + num(r.positive, 2) + " | " + num(r.negative, 2) +
               " | " + num(r.overall_mae, 2) + " | " + num(r.epsilon, 1) + " |\n";
    }
    out += "\n| Shots | Records | Excluded | Undecided items | Participants |\n|---|---|---|---|---|\n";
    for (const auto& r : report.rows)
        out += "| " + std::to_string(r.shot) + " | " + std::to_string(r.records) + " | " +
               std::to_string(r.excluded_records) + " | " + std::to_string(r.undecided) + " | " +
               std::to_string(r.participants) + " |\n";
    return out;
}

} // namespace

std::string metrics_csv(const MetricsReport& report) {
    std::string out = "shot" + items_header() + ",mean,std,positive,negative\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.shot);
        for (double m : r.item_mae) out += "," + num(m);
        out += "," + num(r.mean) + "," + num(r.std) + "," + num(r.positive) + "," + num(r.negative) + "\n";
    }
    return out;
}

std::string curves_svg(const MetricsReport& report) {
    constexpr double width = 720;
    constexpr double height = 420;
    constexpr double left = 60;
    constexpr double right = 160;
    constexpr double top = 30;
    constexpr double bottom = 50;
    static constexpr std::array<const char*, kItemCount> colors = {
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    int k_min = 0;
    int k_max = 10;
    if (!report.rows.empty()) {
        k_min = report.rows.front().shot;
        k_max = std::max(report.rows.back().shot, k_min + 1);
    }
    double y_max = 0;
    for (const auto& r : report.rows)
        for (double m : r.item_mae)
            if (!std::isnan(m)) y_max = std::max(y_max, m);
    y_max = std::max(1.0, std::ceil(y_max * 2.0) / 2.0);

    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto x = [&](int k) { return left + pw * (k - k_min) / static_cast<double>(k_max - k_min); };
    auto y = [&](double v) { return top + ph * (1.0 - v / y_max); };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
                      num(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<line x1=\"" + num(left, 1) + "\" y1=\"" + num(top + ph, 1) + "\" x2=\"" + num(left + pw, 1) + "\" y2=\"" +
           num(top + ph, 1) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + num(left, 1) + "\" y1=\"" + num(top, 1) + "\" x2=\"" + num(left, 1) + "\" y2=\"" +
           num(top + ph, 1) + "\" stroke=\"black\"/>\n";
    for (int k = k_min; k <= k_max; ++k)
        out += "<text x=\"" + num(x(k), 1) + "\" y=\"" + num(top + ph + 18, 1) + "\" text-anchor=\"middle\">" +
               std::to_string(k) + "</text>\n";
    for (double v = 0; v <= y_max + 1e-9; v += 0.5)
        out += "<text x=\"" + num(left - 8, 1) + "\" y=\"" + num(y(v) + 4, 1) + "\" text-anchor=\"end\">" + num(v, 1) +
               "</text>\n";
    out += "<text x=\"" + num(left + pw / 2, 1) + "\" y=\"" + num(height - 10, 1) +
           "\" text-anchor=\"middle\">Shots</text>\n";
    out += "<text x=\"15\" y=\"" + num(top + ph / 2, 1) + "\" transform=\"rotate(-90 15 " + num(top + ph / 2, 1) +
           ")\" text-anchor=\"middle\">MAE</text>\n";

    for (std::size_t i = 0; i < kItemCount; ++i) {
        std::string points;
        for (const auto& r : report.rows) {
            if (std::isnan(r.item_mae[i])) continue;
            if (!points.empty()) points += ' ';
            points += num(x(r.shot), 1) + "," + num(y(r.item_mae[i]), 1);
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colors[i]) + "\" stroke-width=\"2\" points=\"" +
               points + "\"/>\n";
        const double ly = top + 16.0 * static_cast<double>(i);
        out += "<line x1=\"" + num(width - right + 15, 1) + "\" y1=\"" + num(ly, 1) + "\" x2=\"" +
               num(width - right + 35, 1) + "\" y2=\"" + num(ly, 1) + "\" stroke=\"" + colors[i] +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(width - right + 40, 1) + "\" y=\"" + num(ly + 4, 1) + "\">" +
               std::string(item_name(kAllItems[i])) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

void write_report(const fs::path& dir, const MetricsReport& report, bool svg) {
    csv::write_file(dir / "metrics.csv", metrics_csv(report));
    csv::write_file(dir / "curves.csv", curves_csv(report));
    csv::write_file(dir / "pos_neg.csv", pos_neg_csv(report));
    csv::write_file(dir / "participants.csv", participants_csv(report));
    csv::write_file(dir / "summary.md", summary_md(report));
    if (svg) csv::write_file(dir / "curves.svg", curves_svg(report));
}

} // namespace affectsense
