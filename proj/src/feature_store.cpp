#include "affectsense/csv.hpp"
#include "affectsense/features.hpp"

#include <sstream>

namespace affectsense {

namespace fs = std::filesystem;

std::string to_feature_csv(std::span<const DailyFeatureVector> days) {
    std::ostringstream out;
    out << "date";
    for (int id = 1; id <= kFeatureCount; ++id) out << ",f" << id;
    out << '\n';
    for (const auto& d : days) {
        out << format_date(d.date);
        for (const auto& v : d.values) {
            out << ',';
            if (v) out << csv::format_double(*v);
        }
        out << '\n';
    }
    return out.str();
}

std::vector<DailyFeatureVector> parse_feature_csv(std::string_view text, const std::string& participant_id) {
    const auto rows = csv::lines(text);
    std::string header = "date";
    for (int id = 1; id <= kFeatureCount; ++id) header += ",f" + std::to_string(id);
    if (rows.empty() || rows.front() != header) throw SchemaMismatch("feature store: unexpected header");
    std::vector<DailyFeatureVector> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (csv::trim(rows[i]).empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != kFeatureCount + 1)
            throw SchemaMismatch("feature store line " + std::to_string(i + 1) + ": expected 78 fields");
        DailyFeatureVector v;
        v.participant_id = participant_id;
        v.date = parse_date(csv::trim(f[0]));
        for (int id = 1; id <= kFeatureCount; ++id) {
            const auto cell = csv::trim(f[static_cast<std::size_t>(id)]);
            if (cell.empty()) continue;
            auto value = csv::parse_double(cell);
            if (!value)
                throw SchemaMismatch("feature store line " + std::to_string(i + 1) + ": bad value for f" +
                                     std::to_string(id));
            v.at(id) = *value;
        }
        out.push_back(std::move(v));
    }
    return out;
}

void write_feature_store(const fs::path& path, std::span<const DailyFeatureVector> days) {
    csv::write_file(path, to_feature_csv(days));
}

std::vector<DailyFeatureVector> read_feature_store(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw FileNotFound("feature store not found: " + path.string());
    return parse_feature_csv(csv::read_file(path), path.stem().string());
}

} // namespace affectsense
