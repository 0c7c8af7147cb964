#include "affectsense/time_util.hpp"
#include "affectsense/hashing.hpp"

#include <charconv>
#include <cstdio>

namespace affectsense {

namespace {

bool parse_uint(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

void check_tz(TzOffset tz) {
    if (tz.offset.count() < -14 * 60 || tz.offset.count() > 14 * 60)
        throw InvalidTimezone("timezone offset out of range: " + std::to_string(tz.offset.count()) + " min");
}

TzOffset parse_tz(std::string_view text) {
    if (text == "Z" || text == "UTC" || text == "utc") return TzOffset{};
    if (text.size() < 3 || (text[0] != '+' && text[0] != '-'))
        throw InvalidTimezone("invalid timezone '" + std::string(text) + "'");
    const int sign = text[0] == '-' ? -1 : 1;
    std::string_view rest = text.substr(1);
    int hours = 0;
    int minutes = 0;
    bool ok = false;
    if (rest.size() == 2) {
        ok = parse_uint(rest, hours);
    } else if (rest.size() == 4) {
        ok = parse_uint(rest.substr(0, 2), hours) && parse_uint(rest.substr(2, 2), minutes);
    } else if (rest.size() == 5 && rest[2] == ':') {
        ok = parse_uint(rest.substr(0, 2), hours) && parse_uint(rest.substr(3, 2), minutes);
    }
    if (!ok || minutes >= 60) throw InvalidTimezone("invalid timezone '" + std::string(text) + "'");
    TzOffset tz{std::chrono::minutes(sign * (hours * 60 + minutes))};
    check_tz(tz);
    return tz;
}

std::string format_tz(TzOffset tz) {
    const auto total = tz.offset.count();
    const auto mag = total < 0 ? -total : total;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%02d:%02d", total < 0 ? '-' : '+', static_cast<int>(mag / 60),
                  static_cast<int>(mag % 60));
    return buf;
}

Date parse_date(std::string_view text) {
    int y = 0;
    int m = 0;
    int d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_uint(text.substr(0, 4), y) ||
        !parse_uint(text.substr(5, 2), m) || !parse_uint(text.substr(8, 2), d))
        throw Error("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    Date date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
              std::chrono::day(static_cast<unsigned>(d))};
    if (!date.ok()) throw Error("invalid date '" + std::string(text) + "'");
    return date;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

std::int64_t day_start_ms(Date d, TzOffset tz) {
    const auto days = std::chrono::sys_days(d).time_since_epoch().count();
    return static_cast<std::int64_t>(days) * kDayMs - tz.offset_ms();
}

Date local_date(std::int64_t epoch_ms, TzOffset tz) {
    const std::int64_t days = floor_div(epoch_ms + tz.offset_ms(), kDayMs);
    return Date{std::chrono::sys_days(std::chrono::days(days))};
}

std::int64_t local_time_of_day_ms(std::int64_t epoch_ms, TzOffset tz) {
    const std::int64_t local = epoch_ms + tz.offset_ms();
    return local - floor_div(local, kDayMs) * kDayMs;
}

Date add_days(Date d, int days) { return Date{std::chrono::sys_days(d) + std::chrono::days(days)}; }

int days_between(Date a, Date b) {
    return static_cast<int>((std::chrono::sys_days(b) - std::chrono::sys_days(a)).count());
}

std::string hex_digest(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

} // namespace affectsense
