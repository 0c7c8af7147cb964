#pragma once

#include "affectsense/errors.hpp"
#include "affectsense/time_util.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace affectsense {

enum class SensorKind { Screen, Battery, Call, Message, Application, Keyboard, Location };

inline constexpr std::array<SensorKind, 7> kAllSensorKinds = {
    SensorKind::Screen,      SensorKind::Battery,  SensorKind::Call,    SensorKind::Message,
    SensorKind::Application, SensorKind::Keyboard, SensorKind::Location};

std::string_view to_string(SensorKind kind);
/// File name of the per-kind CSV, e.g. "calls.csv".
std::string_view file_name(SensorKind kind);
/// Header line of the per-kind CSV.
std::string_view csv_header(SensorKind kind);

// AWARE screen codes.
enum class ScreenStatus : int { Off = 0, On = 1, Locked = 2, Unlocked = 3 };
// Android BatteryManager status codes.
enum class BatteryStatus : int { Charging = 2, Discharging = 3, NotCharging = 4, Full = 5 };
enum class CallType : int { Incoming = 1, Outgoing = 2, Missed = 3 };
enum class MessageType : int { Received = 1, Sent = 2 };

enum class AppCategory : int {
    Email = 0,
    SocialMedia,
    Dating,
    Social,
    Entertainment,
    FacebookMoments,
    YouTube,
    Twitter,
    Other,
};
inline constexpr int kAppCategoryCount = 9;

/// Bit set over AppCategory; an application may carry several tags.
using CategorySet = std::uint16_t;
constexpr CategorySet category_bit(AppCategory c) { return static_cast<CategorySet>(1u << static_cast<int>(c)); }
constexpr bool has_category(CategorySet set, AppCategory c) { return (set & category_bit(c)) != 0; }

struct ScreenPayload {
    ScreenStatus status{ScreenStatus::Off};
    bool operator==(const ScreenPayload&) const = default;
};

struct BatteryPayload {
    int level{0};
    BatteryStatus status{BatteryStatus::Discharging};
    bool operator==(const BatteryPayload&) const = default;
};

struct CallPayload {
    CallType call_type{CallType::Incoming};
    std::int64_t duration_s{0};
    std::string contact_trace;
    bool operator==(const CallPayload&) const = default;
};

struct MessagePayload {
    MessageType message_type{MessageType::Received};
    std::string contact_trace;
    bool operator==(const MessagePayload&) const = default;
};

/// A foreground episode. `episode_end` is exclusive: a clipped episode ending at local midnight
/// covers up to 23:59:59.999 of the previous day.
struct ApplicationPayload {
    std::string package;
    std::int64_t episode_start{0};
    std::int64_t episode_end{0};
    CategorySet categories{category_bit(AppCategory::Other)};
    std::int64_t duration_ms() const { return episode_end - episode_start; }
    bool operator==(const ApplicationPayload&) const = default;
};

struct KeyboardPayload {
    std::string package;
    std::int64_t text_length_before{0};
    std::int64_t text_length_after{0};
    bool operator==(const KeyboardPayload&) const = default;
};

struct LocationPayload {
    double latitude{0};
    double longitude{0};
    double accuracy{0};
    std::optional<double> speed; // meters/second
    bool operator==(const LocationPayload&) const = default;
};

// Alternative order matches SensorKind so the kind is always derived from the payload.
using Payload = std::variant<ScreenPayload, BatteryPayload, CallPayload, MessagePayload, ApplicationPayload,
                             KeyboardPayload, LocationPayload>;

struct SensorEvent {
    std::int64_t timestamp{0}; // epoch ms, UTC
    Payload payload;

    SensorKind kind() const { return static_cast<SensorKind>(payload.index()); }

    template <typename T>
    const T& as() const {
        return std::get<T>(payload);
    }

    bool operator==(const SensorEvent&) const = default;
};

using EventStream = std::vector<SensorEvent>;

/// Maps application package ids to category tags. Unmapped packages are Other.
class CategoryMap {
  public:
    void add(std::string package, AppCategory category);
    CategorySet lookup(std::string_view package) const;
    std::size_t size() const { return map_.size(); }

  private:
    std::unordered_map<std::string, CategorySet> map_;
};

/// Parses "email", "social_media", "YouTube", ... (case-insensitive; spaces, dashes and
/// underscores ignored). Throws Error on unknown names.
AppCategory parse_app_category(std::string_view name);
std::string_view to_string(AppCategory c);

/// Loads a `package,category` CSV (header required). Multiple rows per package accumulate tags.
CategoryMap load_category_map(const std::filesystem::path& path);

class FileNotFound : public Error {
  public:
    using Error::Error;
};

class SchemaMismatch : public Error {
  public:
    using Error::Error;
};

struct RowError {
    std::size_t line{0}; // 1-based, header is line 1
    std::string message;
};

struct ParseResult {
    EventStream events; // ascending by timestamp
    std::vector<RowError> row_errors;
};

/// Reads one per-kind CSV. Structurally bad rows (field count, non-numeric values, unknown
/// status codes) are reported in `row_errors`; value-range checks belong to validate_and_dedupe.
ParseResult parse_sensor_file(const std::filesystem::path& path, SensorKind kind,
                              const CategoryMap& categories = {});
ParseResult parse_sensor_csv(std::string_view text, SensorKind kind, const CategoryMap& categories = {});

/// Serializes a stream of one kind in the same schema parse_sensor_file reads.
std::string to_sensor_csv(std::span<const SensorEvent> events, SensorKind kind);
void write_sensor_file(const std::filesystem::path& path, std::span<const SensorEvent> events, SensorKind kind);

/// True when the event satisfies all payload invariants.
bool is_valid_event(const SensorEvent& event);

struct CleanResult {
    EventStream events;
    std::size_t duplicates{0};
    std::size_t corrupt{0};
};

/// Collapses exact duplicates (same timestamp and payload, first occurrence kept) and drops
/// invariant-violating events. Output stays sorted; the operation is idempotent.
CleanResult validate_and_dedupe(EventStream stream);

/// Events whose local time falls on `date`. Application episodes overlapping the day are
/// clipped to [local midnight, next local midnight) and their timestamp moved to the clipped start.
EventStream slice_day(std::span<const SensorEvent> stream, Date date, TzOffset tz);

/// All sensor streams of one participant after cleaning.
struct ParticipantStreams {
    std::string participant_id;
    std::array<EventStream, 7> by_kind;

    EventStream& operator[](SensorKind k) { return by_kind[static_cast<std::size_t>(k)]; }
    const EventStream& operator[](SensorKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
};

struct KindIngestStats {
    std::size_t files{0};
    std::size_t events{0}; // after cleaning
    std::size_t row_errors{0};
    std::size_t duplicates{0};
    std::size_t corrupt{0};
    std::vector<std::string> error_samples; // first few "file:line: message"
};

struct IngestReport {
    std::array<KindIngestStats, 7> by_kind;
    const KindIngestStats& operator[](SensorKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
};

/// Reads `<dir>/<kind>.csv` and every `<dir>/<subdir>/<kind>.csv`, merges, sorts and cleans.
/// Missing kind files simply yield empty streams. Throws FileNotFound when `dir` does not exist.
ParticipantStreams load_participant(const std::filesystem::path& dir, const CategoryMap& categories,
                                    IngestReport* report = nullptr);

} // namespace affectsense
