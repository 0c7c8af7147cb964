#include "affectsense/synth.hpp"
#include "affectsense/csv.hpp"
#include "affectsense/experiment.hpp"
#include "affectsense/hashing.hpp"
#include "affectsense/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace affectsense {

namespace fs = std::filesystem;

const std::array<CoupledFeature, kCoupledCount>& coupled_features() {
    static const std::array<CoupledFeature, kCoupledCount> features = {{
        {71, 40.0, 10.0},
        {23, 3.0, 1.5},
        {41, 60.0, 20.0},
        {28, 120.0, 40.0},
        {12, 180.0, 50.0},
    }};
    return features;
}

namespace {

// Rows follow coupled_features(); columns follow the item order.
constexpr std::array<std::array<double, kItemCount>, kCoupledCount> kBasePattern = {{
    {1.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0},
    {0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.5, 0.5, 1.0, 1.0},
    {0.5, 0.5, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0},
    {1.0, 0.0, 0.5, 1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 1.0},
    {1.0, 1.0, 0.0, 1.0, 1.0, -0.5, -0.5, 0.0, 0.0, 0.0},
}};

constexpr int kMaxUnlocks = 200;
constexpr int kMaxMissed = 60;
constexpr int kMessages = 15;
constexpr int kCharsPerMessage = 10;
constexpr int kAppEpisodes = 12;
constexpr double kMaxAppMinutes = 900.0;

struct AppSpec {
    const char* package;
    const char* category;
};
constexpr std::array<AppSpec, 4> kApps = {{
    {"com.google.android.gm", "email"},
    {"com.instagram.android", "social_media"},
    {"com.google.android.youtube", "youtube"},
    {"com.twitter.android", "twitter"},
}};

std::string contact(const std::string& pid, const char* kind, int n) {
    return hex_digest(pid + "/" + kind + "/" + std::to_string(n)).substr(0, 12);
}

SensorEvent at(std::int64_t t, Payload p) { return SensorEvent{t, std::move(p)}; }

struct Places {
    LatLon home;
    LatLon campus;
};

Places places_for(const SyntheticProfile& profile) {
    Rng rng(derive_seed(profile.seed, "places"));
    Places p;
    p.home = {47.60 + rng.uniform(-0.05, 0.05), -122.30 + rng.uniform(-0.05, 0.05)};
    p.campus = {p.home.lat + 0.015 + rng.uniform(0.0, 0.01), p.home.lon + 0.01 + rng.uniform(0.0, 0.01)};
    return p;
}

} // namespace

SyntheticProfile make_profile(const std::string& participant_id, std::uint64_t seed, double coupling_strength,
                              double noise_scale) {
    SyntheticProfile p;
    p.participant_id = participant_id;
    p.seed = seed;
    p.coupling_strength = coupling_strength;
    p.noise_scale = noise_scale;
    Rng rng(derive_seed(seed, "profile"));
    // Positive items sit in the upper half of the scale, negative items low, which gives the
    // skewed per-item label distributions typical of affect questionnaires.
    for (std::size_t i = 0; i < kItemCount; ++i) {
        p.centers[i] = is_positive(kAllItems[i]) ? rng.uniform(2.0, 4.5) : rng.uniform(1.0, 2.6);
        p.spreads[i] = rng.uniform(0.6, 1.1);
    }
    for (std::size_t f = 0; f < kCoupledCount; ++f) {
        double norm = 0;
        for (std::size_t i = 0; i < kItemCount; ++i) {
            p.coupling_matrix[f][i] = kBasePattern[f][i] + 0.2 * rng.normal();
            norm += p.coupling_matrix[f][i] * p.coupling_matrix[f][i];
        }
        norm = std::sqrt(norm);
        for (auto& c : p.coupling_matrix[f]) c /= norm;
    }
    return p;
}

SyntheticParticipant plan_participant(const SyntheticProfile& profile, int weeks) {
    SyntheticParticipant out;
    out.profile = profile;
    Rng label_rng(derive_seed(profile.seed, "labels"));
    for (int w = 0; w < weeks; ++w) {
        // One positive and one negative latent factor per week, plus item-specific noise.
        const double pos = label_rng.normal();
        const double neg = label_rng.normal();
        AffectScores s;
        for (std::size_t i = 0; i < kItemCount; ++i) {
            const double factor = is_positive(kAllItems[i]) ? pos : neg;
            const double raw = profile.centers[i] + profile.spreads[i] * (0.9 * factor + 0.4 * label_rng.normal());
            s.values[i] = static_cast<int>(std::clamp(std::lround(raw), 1L, 5L));
        }
        out.week_labels.push_back(s);
    }

    Rng noise_rng(derive_seed(profile.seed, "noise"));
    const auto& features = coupled_features();
    for (int d = 0; d < weeks * 7; ++d) {
        const AffectScores& a = out.week_labels[static_cast<std::size_t>(d / 7)];
        std::array<double, kCoupledCount> target{};
        std::array<double, kCoupledCount> realized{};
        for (std::size_t f = 0; f < kCoupledCount; ++f) {
            double signal = 0;
            for (std::size_t i = 0; i < kItemCount; ++i)
                signal += profile.coupling_matrix[f][i] * (a.values[i] - profile.centers[i]);
            const double z = noise_rng.normal();
            target[f] = features[f].mean +
                        features[f].sd * (profile.coupling_strength * signal + profile.noise_scale * z);
        }
        auto clamp_to = [&](std::size_t f, double lo, double hi) {
            const double v = std::clamp(target[f], lo, hi);
            if (v != target[f]) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "day %d f%d: target %.2f clamped to %.0f", d, features[f].id,
                              target[f], v);
                out.clamped.push_back(buf);
            }
            return v;
        };
        realized[0] = static_cast<double>(std::lround(clamp_to(0, 0, kMaxUnlocks)));
        realized[1] = static_cast<double>(std::lround(clamp_to(1, 0, kMaxMissed)));
        realized[2] = static_cast<double>(std::lround(clamp_to(2, 0, kMessages * kCharsPerMessage)));
        realized[3] = static_cast<double>(std::lround(clamp_to(3, 0, 1e6)));
        const double per_episode_ms = std::round(clamp_to(4, 0, kMaxAppMinutes) * 60000.0 / kAppEpisodes);
        realized[4] = per_episode_ms * kAppEpisodes / 60000.0;
        out.targets.push_back(target);
        out.realized.push_back(realized);
    }
    return out;
}

std::array<EventStream, 7> day_events(const SyntheticParticipant& participant, int day_index, Date date) {
    std::array<EventStream, 7> ev;
    auto& screen = ev[static_cast<std::size_t>(SensorKind::Screen)];
    auto& battery = ev[static_cast<std::size_t>(SensorKind::Battery)];
    auto& calls = ev[static_cast<std::size_t>(SensorKind::Call)];
    auto& messages = ev[static_cast<std::size_t>(SensorKind::Message)];
    auto& apps = ev[static_cast<std::size_t>(SensorKind::Application)];
    auto& keyboard = ev[static_cast<std::size_t>(SensorKind::Keyboard)];
    auto& locations = ev[static_cast<std::size_t>(SensorKind::Location)];

    const std::string& pid = participant.profile.participant_id;
    const auto& r = participant.realized.at(static_cast<std::size_t>(day_index));
    const std::int64_t day0 = day_start_ms(date, TzOffset{});
    const unsigned wd = std::chrono::weekday(std::chrono::sys_days(date)).c_encoding(); // 0 = Sunday
    const bool weekend = wd == 0 || wd == 6;

    // Screen: an On event every morning, then N four-minute unlock episodes spread over 07:00-23:00.
    screen.push_back(at(day0 + 6 * kHourMs + 55 * kMinuteMs, ScreenPayload{ScreenStatus::On}));
    const int unlocks = static_cast<int>(r[0]);
    for (int i = 0; i < unlocks; ++i) {
        const std::int64_t start = day0 + 7 * kHourMs + i * (16 * kHourMs / unlocks) / 1000 * 1000;
        screen.push_back(at(start, ScreenPayload{ScreenStatus::Unlocked}));
        screen.push_back(at(start + 4 * kMinuteMs, ScreenPayload{ScreenStatus::Off}));
    }

    // Battery: the same charge cycle every day.
    battery.push_back(at(day0, BatteryPayload{60, BatteryStatus::Charging}));
    battery.push_back(at(day0 + 7 * kHourMs, BatteryPayload{100, BatteryStatus::Full}));
    battery.push_back(at(day0 + 7 * kHourMs + 30 * kMinuteMs, BatteryPayload{98, BatteryStatus::Discharging}));
    battery.push_back(at(day0 + 19 * kHourMs, BatteryPayload{35, BatteryStatus::Charging}));
    battery.push_back(at(day0 + 21 * kHourMs, BatteryPayload{80, BatteryStatus::Discharging}));

    // Calls: N missed calls from three contacts, three incoming calls averaging the target
    // duration, weekday-dependent outgoing calls.
    const int missed = static_cast<int>(r[1]);
    for (int i = 0; i < missed; ++i)
        calls.push_back(at(day0 + 10 * kHourMs + i * 10 * kMinuteMs,
                           CallPayload{CallType::Missed, 0, contact(pid, "missed", i % 3)}));
    const auto d = static_cast<std::int64_t>(r[3]);
    const std::int64_t spread = std::min<std::int64_t>(20, d);
    const std::array<std::int64_t, 3> durations = {d - spread, d, d + spread};
    for (int i = 0; i < 3; ++i)
        calls.push_back(at(day0 + (12 + 3 * i) * kHourMs,
                           CallPayload{CallType::Incoming, durations[static_cast<std::size_t>(i)],
                                       contact(pid, "incoming", i % 2)}));
    const int outgoing = 1 + static_cast<int>(wd % 2);
    for (int i = 0; i < outgoing; ++i)
        calls.push_back(at(day0 + (13 + 7 * i) * kHourMs + 30 * kMinuteMs,
                           CallPayload{CallType::Outgoing, 60 + 30 * static_cast<std::int64_t>(wd % 3),
                                       contact(pid, "outgoing", i)}));

    // Messages: weekday-dependent volumes.
    const int received = 5 + static_cast<int>(wd);
    for (int i = 0; i < received; ++i)
        messages.push_back(at(day0 + 8 * kHourMs + i * 45 * kMinuteMs,
                              MessagePayload{MessageType::Received, contact(pid, "sms", i % 4)}));
    const int sent = 3 + static_cast<int>(wd % 3);
    for (int i = 0; i < sent; ++i)
        messages.push_back(at(day0 + 8 * kHourMs + i * 45 * kMinuteMs + 5 * kMinuteMs,
                              MessagePayload{MessageType::Sent, contact(pid, "sms", i % 2)}));

    // Applications: twelve equal episodes whose total is the target duration.
    const auto episode_ms = static_cast<std::int64_t>(std::llround(r[4] * 60000.0 / kAppEpisodes));
    for (int i = 0; i < kAppEpisodes; ++i) {
        const std::int64_t start = day0 + 8 * kHourMs + i * 75 * kMinuteMs;
        ApplicationPayload a;
        a.package = kApps[static_cast<std::size_t>(i) % kApps.size()].package;
        a.episode_start = start;
        a.episode_end = start + episode_ms;
        apps.push_back(at(start, a));
    }

    // Keyboard: fifteen ten-character messages typed a second per key; the one-character
    // deletions are spread over the messages.
    const int deletions = static_cast<int>(r[2]);
    for (int m = 0; m < kMessages; ++m) {
        std::int64_t t = day0 + 9 * kHourMs + m * 40 * kMinuteMs;
        std::int64_t len = 0;
        for (int c = 0; c < kCharsPerMessage; ++c, t += 1000, ++len)
            keyboard.push_back(at(t, KeyboardPayload{"com.whatsapp", len, len + 1}));
        const int mine = deletions / kMessages + (m < deletions % kMessages ? 1 : 0);
        for (int c = 0; c < mine; ++c, t += 1000, --len)
            keyboard.push_back(at(t, KeyboardPayload{"com.whatsapp", len, len - 1}));
    }

    // Location: a fix every 30 minutes, at home overnight and on campus on weekdays.
    const Places places = places_for(participant.profile);
    const LatLon mid{(places.home.lat + places.campus.lat) / 2, (places.home.lon + places.campus.lon) / 2};
    for (int slot = 0; slot < 48; ++slot) {
        const std::int64_t t = day0 + slot * 30 * kMinuteMs;
        LatLon pos = places.home;
        if (!weekend && slot >= 18 && slot < 34) pos = places.campus;
        locations.push_back(at(t, LocationPayload{pos.lat, pos.lon, 10.0, 0.0}));
        if (!weekend && (slot == 17 || slot == 33))
            locations.push_back(at(t + 15 * kMinuteMs, LocationPayload{mid.lat, mid.lon, 15.0, 5.0}));
    }

    for (auto& s : ev)
        std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return ev;
}

std::string synthetic_app_categories_csv() {
    std::string out = "package,category\n";
    for (const auto& a : kApps) out += std::string(a.package) + "," + a.category + "\n";
    return out;
}

std::string participant_id_for(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%02d", index + 1);
    return buf;
}

void write_participant(const SyntheticParticipant& participant, const fs::path& out, Date start_date) {
    const std::string& pid = participant.profile.participant_id;
    const int days = static_cast<int>(participant.realized.size());
    for (int d = 0; d < days; ++d) {
        const Date date = add_days(start_date, d);
        const auto events = day_events(participant, d, date);
        const fs::path dir = out / "data" / pid / format_date(date);
        for (SensorKind kind : kAllSensorKinds)
            write_sensor_file(dir / file_name(kind), events[static_cast<std::size_t>(kind)], kind);
    }
    std::string labels = labels_csv_header() + "\n";
    for (std::size_t w = 0; w < participant.week_labels.size(); ++w) {
        labels += std::to_string(w + 1);
        for (int v : participant.week_labels[w].values) labels += "," + std::to_string(v);
        labels += "\n";
    }
    csv::write_file(out / "labels" / (pid + ".csv"), labels);
}

FleetReport gen_fleet(const SynthOptions& options, const fs::path& out) {
    if (options.participants < 1) throw ConfigError("synth needs at least one participant");
    if (options.coupling < 0 || options.noise < 0) throw ConfigError("coupling and noise must be non-negative");
    if (options.weeks < 1) throw ConfigError("synth needs at least one week");
    FleetReport report;
    for (int i = 0; i < options.participants; ++i) {
        const std::string pid = participant_id_for(i);
        const auto profile = make_profile(pid, derive_seed(options.seed, "participant/" + pid), options.coupling,
                                          options.noise);
        const auto participant = plan_participant(profile, options.weeks);
        write_participant(participant, out, options.start_date);
        report.participants.push_back(pid);
        for (const auto& c : participant.clamped) report.clamped.push_back(pid + " " + c);
        report.files += participant.realized.size() * kAllSensorKinds.size() + 1;
    }
    csv::write_file(out / "app_categories.csv", synthetic_app_categories_csv());

    RunConfig config;
    config.participants = report.participants;
    config.data_root = out / "data";
    config.labels_root = out / "labels";
    config.output_root = out / "out";
    config.features_root = out / "out" / "features";
    config.app_categories = out / "app_categories.csv";
    config.study.start_date = options.start_date;
    config.backend.kind = "oracle";
    config.experiment.run_id = "synth";
    config.experiment.seed = options.seed;
    csv::write_file(out / "config.json", config_to_json(config, out));
    report.files += 2;
    return report;
}

} // namespace affectsense
