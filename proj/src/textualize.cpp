#include "affectsense/textualize.hpp"
#include "affectsense/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace affectsense {

namespace {

constexpr std::string_view kHeaderMiddle = " 00:00:00 to ";
constexpr std::string_view kHeaderEnd = " 23:59:59";

std::string header_for(Date d) {
    const std::string date = format_date(d);
    return date + std::string(kHeaderMiddle) + date + std::string(kHeaderEnd);
}

// Returns the date if `line` is a day header.
std::optional<Date> parse_header(std::string_view line) {
    if (line.size() != 10 + kHeaderMiddle.size() + 10 + kHeaderEnd.size()) return std::nullopt;
    if (line.substr(10, kHeaderMiddle.size()) != kHeaderMiddle) return std::nullopt;
    if (line.substr(line.size() - kHeaderEnd.size()) != kHeaderEnd) return std::nullopt;
    const auto first = line.substr(0, 10);
    const auto second = line.substr(10 + kHeaderMiddle.size(), 10);
    if (first != second) return std::nullopt;
    try {
        return parse_date(first);
    } catch (const Error&) {
        return std::nullopt;
    }
}

const std::unordered_map<std::string_view, int>& name_index() {
    static const auto index = [] {
        std::unordered_map<std::string_view, int> m;
        for (const auto& f : feature_catalog()) m.emplace(f.name, f.id);
        return m;
    }();
    return index;
}

const std::unordered_map<std::string, Family>& no_data_index() {
    static const auto index = [] {
        std::unordered_map<std::string, Family> m;
        for (Family f : kAllFamilies) m.emplace("No " + std::string(family_noun(f)) + " data was recorded.", f);
        return m;
    }();
    return index;
}

} // namespace

std::string format_feature_value(double v) {
    if (v == 0) return "0";
    char buf[64];
    if (std::abs(v) < 1e15 && v == std::trunc(v)) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    } else {
        std::snprintf(buf, sizeof buf, "%.2f", v);
        if (std::string_view(buf) == "-0.00") return "0.00";
    }
    return buf;
}

std::string render_day(const DailyFeatureVector& vector) {
    std::string out = header_for(vector.date);
    for (Family family : kAllFamilies) {
        if (vector.family_missing(family)) {
            out += "\nNo ";
            out += family_noun(family);
            out += " data was recorded.";
            continue;
        }
        const auto [lo, hi] = family_range(family);
        for (int id = lo; id <= hi; ++id) {
            const auto& v = vector.get(id);
            if (!v) continue;
            const auto& info = feature_info(id);
            out += '\n';
            out += info.name;
            out += " is ";
            out += format_feature_value(*v);
            if (const auto unit = unit_suffix(info.unit); !unit.empty()) {
                out += ' ';
                out += unit;
            }
            out += '.';
        }
    }
    return out;
}

WeeklyDescription render_week(std::span<const DailyFeatureVector> vectors, int week_index) {
    if (vectors.size() != 7)
        throw WrongDayCount("a week needs 7 days, got " + std::to_string(vectors.size()));
    std::vector<const DailyFeatureVector*> sorted;
    for (const auto& v : vectors) sorted.push_back(&v);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return std::chrono::sys_days(a->date) < std::chrono::sys_days(b->date);
    });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (days_between(sorted[i - 1]->date, sorted[i]->date) != 1)
            throw NonConsecutiveDates("days " + format_date(sorted[i - 1]->date) + " and " +
                                      format_date(sorted[i]->date) + " are not consecutive");

    WeeklyDescription week;
    week.participant_id = sorted.front()->participant_id;
    week.week_index = week_index;
    for (const auto* v : sorted) {
        week.days.emplace_back(v->date, render_day(*v));
        if (!week.full_text.empty()) week.full_text += "\n\n";
        week.full_text += week.days.back().second;
    }
    week.approx_token_count = week.full_text.size() / 4;
    return week;
}

ParsedDay parse_day(std::string_view text) {
    const auto rows = csv::lines(text);
    std::size_t i = 0;
    while (i < rows.size() && rows[i].empty()) ++i;
    if (i == rows.size()) throw Error("empty day description");
    const auto date = parse_header(rows[i]);
    if (!date) throw Error("missing day header: '" + std::string(rows[i]) + "'");
    ParsedDay day;
    day.date = *date;
    for (++i; i < rows.size(); ++i) {
        const std::string_view line = rows[i];
        if (line.empty()) continue;
        if (auto it = no_data_index().find(std::string(line)); it != no_data_index().end()) {
            day.missing_families.insert(it->second);
            continue;
        }
        const auto is = line.find(" is ");
        if (is == std::string_view::npos || line.back() != '.')
            throw Error("unrecognized description line: '" + std::string(line) + "'");
        const auto it = name_index().find(line.substr(0, is));
        if (it == name_index().end()) throw Error("unknown feature in line: '" + std::string(line) + "'");
        std::string_view rest = line.substr(is + 4);
        rest.remove_suffix(1);
        const auto space = rest.find(' ');
        const auto number = rest.substr(0, space);
        const auto value = csv::parse_double(number);
        if (!value) throw Error("bad value in line: '" + std::string(line) + "'");
        day.values[static_cast<std::size_t>(it->second - 1)] = *value;
    }
    return day;
}

std::vector<ParsedDay> parse_week(std::string_view text) {
    std::vector<ParsedDay> out;
    std::size_t day_begin = std::string_view::npos;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        if (parse_header(text.substr(pos, end - pos))) {
            if (day_begin != std::string_view::npos) out.push_back(parse_day(text.substr(day_begin, pos - day_begin)));
            day_begin = pos;
        }
        pos = end + 1;
    }
    if (day_begin != std::string_view::npos) out.push_back(parse_day(text.substr(day_begin)));
    return out;
}

} // namespace affectsense
