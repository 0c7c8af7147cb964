#pragma once

#include "affectsense/errors.hpp"
#include "affectsense/features.hpp"

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affectsense {

class NonConsecutiveDates : public Error {
  public:
    using Error::Error;
};

class WrongDayCount : public Error {
  public:
    using Error::Error;
};

struct WeeklyDescription {
    std::string participant_id;
    int week_index{0};
    std::vector<std::pair<Date, std::string>> days; // 7, ascending
    std::string full_text;
    std::size_t approx_token_count{0};
};

/// Integers print bare; other values with two decimals.
std::string format_feature_value(double v);

/// "<date> 00:00:00 to <date> 23:59:59" followed by one line per present feature
/// ("<name> is <value> <unit>.") and one "No <family> data was recorded." line per empty family,
/// in feature-id order. Lines are joined with '\n', no trailing newline.
std::string render_day(const DailyFeatureVector& vector);

/// Sorts by date, requires 7 consecutive days, joins day texts with one blank line.
WeeklyDescription render_week(std::span<const DailyFeatureVector> vectors, int week_index = 0);

struct ParsedDay {
    Date date{};
    FeatureValues values{};
    std::set<Family> missing_families;
};

/// Inverse of render_day. Values come back at the rendered precision. Throws Error on lines that
/// match neither sentence form.
ParsedDay parse_day(std::string_view text);
/// Splits a weekly description at its date headers and parses each day.
std::vector<ParsedDay> parse_week(std::string_view text);

} // namespace affectsense
