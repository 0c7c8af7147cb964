#pragma once

#include "affectsense/errors.hpp"

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace affectsense {

using Date = std::chrono::year_month_day;

inline constexpr std::int64_t kMinuteMs = 60'000;
inline constexpr std::int64_t kHourMs = 60 * kMinuteMs;
inline constexpr std::int64_t kDayMs = 24 * kHourMs;

class InvalidTimezone : public Error {
  public:
    using Error::Error;
};

/// Fixed UTC offset for a participant's local civil time.
struct TzOffset {
    std::chrono::minutes offset{0};

    std::int64_t offset_ms() const { return offset.count() * kMinuteMs; }
    bool operator==(const TzOffset&) const = default;
};

/// Accepts "Z", "UTC", "+HH:MM", "-HH:MM", "+HHMM" and "+HH". Offsets beyond +-14:00 are rejected.
TzOffset parse_tz(std::string_view text);
std::string format_tz(TzOffset tz);
/// Throws InvalidTimezone when the offset is outside [-14:00, +14:00].
void check_tz(TzOffset tz);

/// Parses YYYY-MM-DD; throws Error on malformed or impossible dates.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// UTC epoch milliseconds of local midnight starting `d`.
std::int64_t day_start_ms(Date d, TzOffset tz);
/// Local calendar date containing the instant `epoch_ms`.
Date local_date(std::int64_t epoch_ms, TzOffset tz);
/// Milliseconds since local midnight, in [0, kDayMs).
std::int64_t local_time_of_day_ms(std::int64_t epoch_ms, TzOffset tz);

Date add_days(Date d, int days);
/// Whole days from `a` to `b` (b - a).
int days_between(Date a, Date b);

} // namespace affectsense
