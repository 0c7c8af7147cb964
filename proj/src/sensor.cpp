#include "affectsense/sensor.hpp"
#include "affectsense/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace affectsense {

namespace fs = std::filesystem;

std::string_view to_string(SensorKind kind) {
    switch (kind) {
    case SensorKind::Screen: return "screen";
    case SensorKind::Battery: return "battery";
    case SensorKind::Call: return "calls";
    case SensorKind::Message: return "messages";
    case SensorKind::Application: return "applications";
    case SensorKind::Keyboard: return "keyboard";
    case SensorKind::Location: return "locations";
    }
    return "?";
}

std::string_view file_name(SensorKind kind) {
    switch (kind) {
    case SensorKind::Screen: return "screen.csv";
    case SensorKind::Battery: return "battery.csv";
    case SensorKind::Call: return "calls.csv";
    case SensorKind::Message: return "messages.csv";
    case SensorKind::Application: return "applications.csv";
    case SensorKind::Keyboard: return "keyboard.csv";
    case SensorKind::Location: return "locations.csv";
    }
    return "";
}

std::string_view csv_header(SensorKind kind) {
    switch (kind) {
    case SensorKind::Screen: return "timestamp_ms,status";
    case SensorKind::Battery: return "timestamp_ms,level,status";
    case SensorKind::Call: return "timestamp_ms,call_type,duration_s,trace";
    case SensorKind::Message: return "timestamp_ms,message_type,trace";
    case SensorKind::Application: return "start_ms,end_ms,package";
    case SensorKind::Keyboard: return "timestamp_ms,package,len_before,len_after";
    case SensorKind::Location: return "timestamp_ms,lat,lon,accuracy_m,speed_mps";
    }
    return "";
}

// ---- categories -------------------------------------------------------------

namespace {

std::string normalize_name(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (c == ' ' || c == '_' || c == '-') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

} // namespace

AppCategory parse_app_category(std::string_view name) {
    const std::string n = normalize_name(name);
    if (n == "email") return AppCategory::Email;
    if (n == "socialmedia") return AppCategory::SocialMedia;
    if (n == "dating") return AppCategory::Dating;
    if (n == "social") return AppCategory::Social;
    if (n == "entertainment") return AppCategory::Entertainment;
    if (n == "facebookmoments") return AppCategory::FacebookMoments;
    if (n == "youtube") return AppCategory::YouTube;
    if (n == "twitter") return AppCategory::Twitter;
    if (n == "other") return AppCategory::Other;
    throw Error("unknown application category '" + std::string(name) + "'");
}

std::string_view to_string(AppCategory c) {
    switch (c) {
    case AppCategory::Email: return "email";
    case AppCategory::SocialMedia: return "social_media";
    case AppCategory::Dating: return "dating";
    case AppCategory::Social: return "social";
    case AppCategory::Entertainment: return "entertainment";
    case AppCategory::FacebookMoments: return "facebook_moments";
    case AppCategory::YouTube: return "youtube";
    case AppCategory::Twitter: return "twitter";
    case AppCategory::Other: return "other";
    }
    return "other";
}

void CategoryMap::add(std::string package, AppCategory category) {
    auto& set = map_[std::move(package)];
    set = static_cast<CategorySet>(set | category_bit(category));
    // "other" only survives when nothing more specific is known
    if (set != category_bit(AppCategory::Other))
        set = static_cast<CategorySet>(set & ~category_bit(AppCategory::Other));
}

CategorySet CategoryMap::lookup(std::string_view package) const {
    auto it = map_.find(std::string(package));
    return it == map_.end() ? category_bit(AppCategory::Other) : it->second;
}

CategoryMap load_category_map(const fs::path& path) {
    if (!fs::exists(path)) throw FileNotFound("category map not found: " + path.string());
    const std::string text = csv::read_file(path);
    const auto rows = csv::lines(text);
    if (rows.empty() || csv::trim(rows.front()) != "package,category")
        throw SchemaMismatch(path.string() + ": expected header 'package,category'");
    CategoryMap map;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (csv::trim(rows[i]).empty()) continue;
        auto f = csv::split(rows[i]);
        if (f.size() != 2) throw SchemaMismatch(path.string() + ":" + std::to_string(i + 1) + ": expected 2 fields");
        map.add(std::string(csv::trim(f[0])), parse_app_category(csv::trim(f[1])));
    }
    return map;
}

// ---- parsing ---------------------------------------------------------------

namespace {

struct RowParser {
    const std::vector<std::string>& f;
    std::string error;

    std::optional<std::int64_t> integer(std::size_t i, const char* what) {
        auto v = csv::parse_int(f[i]);
        if (!v && error.empty()) error = std::string("invalid ") + what;
        return v;
    }
    std::optional<double> real(std::size_t i, const char* what) {
        auto v = csv::parse_double(f[i]);
        if (!v && error.empty()) error = std::string("invalid ") + what;
        return v;
    }
};

std::size_t field_count(SensorKind kind) {
    switch (kind) {
    case SensorKind::Screen: return 2;
    case SensorKind::Battery: return 3;
    case SensorKind::Call: return 4;
    case SensorKind::Message: return 3;
    case SensorKind::Application: return 3;
    case SensorKind::Keyboard: return 4;
    case SensorKind::Location: return 5;
    }
    return 0;
}

// Returns the event or fills `error`.
std::optional<SensorEvent> parse_row(const std::vector<std::string>& f, SensorKind kind, const CategoryMap& cats,
                                     std::string& error) {
    RowParser p{f, {}};
    SensorEvent ev;
    switch (kind) {
    case SensorKind::Screen: {
        auto t = p.integer(0, "timestamp");
        auto s = p.integer(1, "status");
        if (!p.error.empty()) break;
        if (*s < 0 || *s > 3) {
            p.error = "invalid status";
            break;
        }
        ev = {*t, ScreenPayload{static_cast<ScreenStatus>(*s)}};
        break;
    }
    case SensorKind::Battery: {
        auto t = p.integer(0, "timestamp");
        auto level = p.integer(1, "level");
        auto s = p.integer(2, "status");
        if (!p.error.empty()) break;
        if (*s < 2 || *s > 5) {
            p.error = "invalid status";
            break;
        }
        ev = {*t, BatteryPayload{static_cast<int>(*level), static_cast<BatteryStatus>(*s)}};
        break;
    }
    case SensorKind::Call: {
        auto t = p.integer(0, "timestamp");
        auto type = p.integer(1, "call_type");
        auto d = p.integer(2, "duration");
        if (!p.error.empty()) break;
        if (*type < 1 || *type > 3) {
            p.error = "invalid call_type";
            break;
        }
        ev = {*t, CallPayload{static_cast<CallType>(*type), *d, std::string(csv::trim(f[3]))}};
        break;
    }
    case SensorKind::Message: {
        auto t = p.integer(0, "timestamp");
        auto type = p.integer(1, "message_type");
        if (!p.error.empty()) break;
        if (*type < 1 || *type > 2) {
            p.error = "invalid message_type";
            break;
        }
        ev = {*t, MessagePayload{static_cast<MessageType>(*type), std::string(csv::trim(f[2]))}};
        break;
    }
    case SensorKind::Application: {
        auto start = p.integer(0, "start");
        auto end = p.integer(1, "end");
        if (!p.error.empty()) break;
        std::string package(csv::trim(f[2]));
        if (package.empty()) {
            p.error = "empty package";
            break;
        }
        const auto set = cats.lookup(package);
        ev = {*start, ApplicationPayload{std::move(package), *start, *end, set}};
        break;
    }
    case SensorKind::Keyboard: {
        auto t = p.integer(0, "timestamp");
        auto before = p.integer(2, "len_before");
        auto after = p.integer(3, "len_after");
        if (!p.error.empty()) break;
        ev = {*t, KeyboardPayload{std::string(csv::trim(f[1])), *before, *after}};
        break;
    }
    case SensorKind::Location: {
        auto t = p.integer(0, "timestamp");
        auto lat = p.real(1, "lat");
        auto lon = p.real(2, "lon");
        auto acc = p.real(3, "accuracy");
        std::optional<double> speed;
        if (!csv::trim(f[4]).empty()) speed = p.real(4, "speed");
        if (!p.error.empty()) break;
        ev = {*t, LocationPayload{*lat, *lon, *acc, speed}};
        break;
    }
    }
    if (!p.error.empty()) {
        error = std::move(p.error);
        return std::nullopt;
    }
    return ev;
}

void sort_stream(EventStream& s) {
    std::stable_sort(s.begin(), s.end(),
                     [](const SensorEvent& a, const SensorEvent& b) { return a.timestamp < b.timestamp; });
}

} // namespace

ParseResult parse_sensor_csv(std::string_view text, SensorKind kind, const CategoryMap& categories) {
    const auto rows = csv::lines(text);
    if (rows.empty() || csv::trim(rows.front()) != csv_header(kind))
        throw SchemaMismatch("expected header '" + std::string(csv_header(kind)) + "'");
    ParseResult result;
    const std::size_t expected = field_count(kind);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (csv::trim(rows[i]).empty()) continue;
        const auto fields = csv::split(rows[i]);
        if (fields.size() != expected) {
            result.row_errors.push_back({i + 1, "expected " + std::to_string(expected) + " fields, got " +
                                                    std::to_string(fields.size())});
            continue;
        }
        std::string error;
        if (auto ev = parse_row(fields, kind, categories, error)) {
            result.events.push_back(std::move(*ev));
        } else {
            result.row_errors.push_back({i + 1, std::move(error)});
        }
    }
    sort_stream(result.events);
    return result;
}

ParseResult parse_sensor_file(const fs::path& path, SensorKind kind, const CategoryMap& categories) {
    if (!fs::is_regular_file(path)) throw FileNotFound("sensor file not found: " + path.string());
    try {
        return parse_sensor_csv(csv::read_file(path), kind, categories);
    } catch (const SchemaMismatch& e) {
        throw SchemaMismatch(path.string() + ": " + e.what());
    }
}

std::string to_sensor_csv(std::span<const SensorEvent> events, SensorKind kind) {
    std::ostringstream out;
    out << csv_header(kind) << '\n';
    for (const auto& ev : events) {
        if (ev.kind() != kind) throw Error("event kind does not match file kind");
        std::vector<std::string> f;
        switch (kind) {
        case SensorKind::Screen:
            f = {std::to_string(ev.timestamp), std::to_string(static_cast<int>(ev.as<ScreenPayload>().status))};
            break;
        case SensorKind::Battery: {
            const auto& b = ev.as<BatteryPayload>();
            f = {std::to_string(ev.timestamp), std::to_string(b.level), std::to_string(static_cast<int>(b.status))};
            break;
        }
        case SensorKind::Call: {
            const auto& c = ev.as<CallPayload>();
            f = {std::to_string(ev.timestamp), std::to_string(static_cast<int>(c.call_type)),
                 std::to_string(c.duration_s), c.contact_trace};
            break;
        }
        case SensorKind::Message: {
            const auto& m = ev.as<MessagePayload>();
            f = {std::to_string(ev.timestamp), std::to_string(static_cast<int>(m.message_type)), m.contact_trace};
            break;
        }
        case SensorKind::Application: {
            const auto& a = ev.as<ApplicationPayload>();
            f = {std::to_string(a.episode_start), std::to_string(a.episode_end), a.package};
            break;
        }
        case SensorKind::Keyboard: {
            const auto& k = ev.as<KeyboardPayload>();
            f = {std::to_string(ev.timestamp), k.package, std::to_string(k.text_length_before),
                 std::to_string(k.text_length_after)};
            break;
        }
        case SensorKind::Location: {
            const auto& l = ev.as<LocationPayload>();
            f = {std::to_string(ev.timestamp), csv::format_double(l.latitude), csv::format_double(l.longitude),
                 csv::format_double(l.accuracy), l.speed ? csv::format_double(*l.speed) : std::string()};
            break;
        }
        }
        out << csv::join(f) << '\n';
    }
    return out.str();
}

void write_sensor_file(const fs::path& path, std::span<const SensorEvent> events, SensorKind kind) {
    csv::write_file(path, to_sensor_csv(events, kind));
}

// ---- cleaning ---------------------------------------------------------------

bool is_valid_event(const SensorEvent& ev) {
    if (ev.timestamp < 0) return false;
    return std::visit(
        [&](const auto& p) -> bool {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ScreenPayload>) {
                const int s = static_cast<int>(p.status);
                return s >= 0 && s <= 3;
            } else if constexpr (std::is_same_v<T, BatteryPayload>) {
                const int s = static_cast<int>(p.status);
                return p.level >= 0 && p.level <= 100 && s >= 2 && s <= 5;
            } else if constexpr (std::is_same_v<T, CallPayload>) {
                const int t = static_cast<int>(p.call_type);
                if (t < 1 || t > 3 || p.duration_s < 0) return false;
                return p.call_type != CallType::Missed || p.duration_s == 0;
            } else if constexpr (std::is_same_v<T, MessagePayload>) {
                const int t = static_cast<int>(p.message_type);
                return t == 1 || t == 2;
            } else if constexpr (std::is_same_v<T, ApplicationPayload>) {
                return p.episode_start >= 0 && p.episode_end >= p.episode_start && !p.package.empty();
            } else if constexpr (std::is_same_v<T, KeyboardPayload>) {
                return p.text_length_before >= 0 && p.text_length_after >= 0;
            } else {
                return std::isfinite(p.latitude) && std::isfinite(p.longitude) && p.latitude >= -90 &&
                       p.latitude <= 90 && p.longitude >= -180 && p.longitude <= 180 && p.accuracy >= 0 &&
                       (!p.speed || (std::isfinite(*p.speed) && *p.speed >= 0));
            }
        },
        ev.payload);
}

CleanResult validate_and_dedupe(EventStream stream) {
    sort_stream(stream);
    CleanResult out;
    out.events.reserve(stream.size());
    std::size_t group_begin = 0; // first output index sharing the current timestamp
    for (auto& ev : stream) {
        if (!is_valid_event(ev)) {
            ++out.corrupt;
            continue;
        }
        if (!out.events.empty() && out.events.back().timestamp != ev.timestamp) group_begin = out.events.size();
        const bool dup = std::any_of(out.events.begin() + static_cast<std::ptrdiff_t>(group_begin), out.events.end(),
                                     [&](const SensorEvent& kept) { return kept == ev; });
        if (dup) {
            ++out.duplicates;
            continue;
        }
        out.events.push_back(std::move(ev));
    }
    return out;
}

EventStream slice_day(std::span<const SensorEvent> stream, Date date, TzOffset tz) {
    check_tz(tz);
    const std::int64_t begin = day_start_ms(date, tz);
    const std::int64_t end = begin + kDayMs;
    EventStream out;
    for (const auto& ev : stream) {
        if (ev.kind() == SensorKind::Application) {
            const auto& a = ev.as<ApplicationPayload>();
            const bool overlaps = a.episode_start < end && a.episode_end > begin;
            const bool instant_inside = a.episode_start == a.episode_end && a.episode_start >= begin &&
                                        a.episode_start < end;
            if (!overlaps && !instant_inside) continue;
            ApplicationPayload clipped = a;
            clipped.episode_start = std::max(a.episode_start, begin);
            clipped.episode_end = std::min(a.episode_end, end);
            out.push_back({clipped.episode_start, std::move(clipped)});
        } else if (ev.timestamp >= begin && ev.timestamp < end) {
            out.push_back(ev);
        }
    }
    sort_stream(out);
    return out;
}

// ---- participant directories -------------------------------------------------

ParticipantStreams load_participant(const fs::path& dir, const CategoryMap& categories, IngestReport* report) {
    if (!fs::is_directory(dir)) throw FileNotFound("participant directory not found: " + dir.string());
    ParticipantStreams out;
    out.participant_id = dir.filename().string();

    std::vector<fs::path> roots{dir};
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) subdirs.push_back(entry.path());
    std::sort(subdirs.begin(), subdirs.end());
    roots.insert(roots.end(), subdirs.begin(), subdirs.end());

    IngestReport local;
    for (SensorKind kind : kAllSensorKinds) {
        auto& stats = local.by_kind[static_cast<std::size_t>(kind)];
        EventStream merged;
        for (const auto& root : roots) {
            const fs::path file = root / file_name(kind);
            if (!fs::is_regular_file(file)) continue;
            ++stats.files;
            auto parsed = parse_sensor_file(file, kind, categories);
            stats.row_errors += parsed.row_errors.size();
            for (const auto& e : parsed.row_errors)
                if (stats.error_samples.size() < 5)
                    stats.error_samples.push_back(file.string() + ":" + std::to_string(e.line) + ": " + e.message);
            std::move(parsed.events.begin(), parsed.events.end(), std::back_inserter(merged));
        }
        auto cleaned = validate_and_dedupe(std::move(merged));
        stats.events = cleaned.events.size();
        stats.duplicates = cleaned.duplicates;
        stats.corrupt = cleaned.corrupt;
        out[kind] = std::move(cleaned.events);
    }
    if (report) *report = std::move(local);
    return out;
}

} // namespace affectsense
