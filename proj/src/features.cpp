#include "affectsense/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace affectsense {

namespace {

double minutes(std::int64_t ms) { return static_cast<double>(ms) / static_cast<double>(kMinuteMs); }

double count(std::size_t n) { return static_cast<double>(n); }

std::size_t most_frequent_count(const std::map<std::string, std::size_t>& counts) {
    std::size_t best = 0;
    for (const auto& [contact, n] : counts) best = std::max(best, n);
    return best;
}

// Smallest value wins ties.
std::int64_t mode_of(const std::vector<std::int64_t>& values) {
    std::map<std::int64_t, std::size_t> freq;
    for (auto v : values) ++freq[v];
    std::int64_t best = freq.begin()->first;
    std::size_t best_n = 0;
    for (const auto& [v, n] : freq) {
        if (n > best_n) {
            best = v;
            best_n = n;
        }
    }
    return best;
}

constexpr std::array<AppCategory, 8> kCountedCategories = {
    AppCategory::Email,           AppCategory::SocialMedia, AppCategory::Dating,  AppCategory::Social,
    AppCategory::Entertainment,   AppCategory::FacebookMoments, AppCategory::YouTube, AppCategory::Twitter};

// Slot (0-based, within the 10 count items) for each category in kCountedCategories.
constexpr std::array<std::size_t, 8> kCategorySlot = {0, 2, 3, 4, 5, 6, 8, 9};

} // namespace

FamilyValues<20> app_features(std::span<const SensorEvent> episodes) {
    std::array<std::size_t, 10> counts{};
    std::array<std::int64_t, 10> durations{};
    std::map<std::string, std::pair<std::int64_t, std::size_t>> per_package; // duration, episodes

    for (const auto& ev : episodes) {
        const auto& a = ev.as<ApplicationPayload>();
        const std::int64_t d = a.duration_ms();
        ++counts[1];
        durations[1] += d;
        for (std::size_t i = 0; i < kCountedCategories.size(); ++i) {
            if (has_category(a.categories, kCountedCategories[i])) {
                ++counts[kCategorySlot[i]];
                durations[kCategorySlot[i]] += d;
            }
        }
        auto& pkg = per_package[a.package];
        pkg.first += d;
        ++pkg.second;
    }

    // std::map iterates packages lexicographically, so strict > keeps the smallest id on ties.
    const std::pair<std::int64_t, std::size_t>* top = nullptr;
    for (const auto& [package, usage] : per_package)
        if (!top || usage.first > top->first) top = &usage;
    if (top) {
        counts[7] = top->second;
        durations[7] = top->first;
    }

    FamilyValues<20> out;
    for (std::size_t i = 0; i < 10; ++i) {
        out[i] = count(counts[i]);
        out[10 + i] = minutes(durations[i]);
    }
    return out;
}

FamilyValues<2> battery_features(std::span<const SensorEvent> events) {
    if (events.empty()) return {};
    std::size_t discharging = 0;
    std::size_t charging = 0;
    std::optional<BatteryStatus> prev;
    for (const auto& ev : events) {
        const auto status = ev.as<BatteryPayload>().status;
        if (prev && *prev == status) continue;
        if (status == BatteryStatus::Discharging) ++discharging;
        if (status == BatteryStatus::Charging) ++charging;
        prev = status;
    }
    return {count(discharging), count(charging)};
}

FamilyValues<15> call_features(std::span<const SensorEvent> events) {
    if (events.empty()) return {};
    struct Direction {
        std::map<std::string, std::size_t> contacts;
        std::vector<std::int64_t> durations;
    };
    Direction missed;
    Direction incoming;
    Direction outgoing;
    for (const auto& ev : events) {
        const auto& c = ev.as<CallPayload>();
        Direction& d = c.call_type == CallType::Missed     ? missed
                       : c.call_type == CallType::Incoming ? incoming
                                                           : outgoing;
        ++d.contacts[c.contact_trace];
        d.durations.push_back(c.duration_s);
    }

    FamilyValues<15> out;
    out[0] = count(missed.durations.size());
    out[1] = count(missed.contacts.size());
    out[2] = count(most_frequent_count(missed.contacts));

    auto timed = [&](const Direction& d, std::size_t base) {
        const std::size_t n = d.durations.size();
        const std::int64_t sum = std::accumulate(d.durations.begin(), d.durations.end(), std::int64_t{0});
        out[base] = count(n);
        out[base + 1] = count(d.contacts.size());
        if (n > 0) {
            out[base + 2] = static_cast<double>(sum) / static_cast<double>(n);
            out[base + 4] = static_cast<double>(mode_of(d.durations));
        }
        out[base + 3] = static_cast<double>(sum);
        out[base + 5] = count(most_frequent_count(d.contacts));
    };
    timed(incoming, 3);
    timed(outgoing, 9);
    return out;
}

FamilyValues<6> message_features(std::span<const SensorEvent> events) {
    if (events.empty()) return {};
    std::map<std::string, std::size_t> received;
    std::map<std::string, std::size_t> sent;
    std::size_t n_received = 0;
    std::size_t n_sent = 0;
    for (const auto& ev : events) {
        const auto& m = ev.as<MessagePayload>();
        if (m.message_type == MessageType::Received) {
            ++received[m.contact_trace];
            ++n_received;
        } else {
            ++sent[m.contact_trace];
            ++n_sent;
        }
    }
    return {count(most_frequent_count(received)), count(n_received), count(received.size()),
            count(most_frequent_count(sent)),     count(n_sent),     count(sent.size())};
}

FamilyValues<7> keyboard_features(std::span<const SensorEvent> events, std::int64_t session_gap_ms) {
    if (events.empty()) return {};
    std::size_t typing = 0;
    std::size_t plus_one = 0;
    std::size_t minus_many = 0;
    std::size_t minus_one = 0;

    std::size_t sessions = 0;
    std::int64_t final_chars_sum = 0;
    std::int64_t gap_sum_ms = 0;
    std::size_t gaps = 0;

    const SensorEvent* prev = nullptr;
    std::int64_t session_last_len = 0;
    for (const auto& ev : events) {
        const auto& k = ev.as<KeyboardPayload>();
        const std::int64_t delta = k.text_length_after - k.text_length_before;
        if (delta == 0) continue;
        ++typing;
        if (delta == 1) ++plus_one;
        if (delta == -1) ++minus_one;
        if (delta <= -2) ++minus_many;

        const bool continues = prev && prev->as<KeyboardPayload>().package == k.package &&
                               ev.timestamp - prev->timestamp <= session_gap_ms;
        if (continues) {
            gap_sum_ms += ev.timestamp - prev->timestamp;
            ++gaps;
        } else {
            if (prev) final_chars_sum += session_last_len;
            ++sessions;
        }
        session_last_len = k.text_length_after;
        prev = &ev;
    }
    if (prev) final_chars_sum += session_last_len;

    FamilyValues<7> out;
    out[0] = count(typing);
    out[1] = count(plus_one);
    out[2] = count(minus_many);
    out[3] = count(minus_one);
    if (sessions > 0) out[4] = static_cast<double>(final_chars_sum) / static_cast<double>(sessions);
    out[5] = count(sessions);
    if (gaps > 0) out[6] = static_cast<double>(gap_sum_ms) / 1000.0 / static_cast<double>(gaps);
    return out;
}

FamilyValues<7> screen_features(std::span<const SensorEvent> events, DayWindow day) {
    if (events.empty()) return {};
    std::vector<std::int64_t> episodes;
    std::optional<std::int64_t> first_unlock;
    std::optional<std::int64_t> open;
    for (const auto& ev : events) {
        const auto status = ev.as<ScreenPayload>().status;
        if (status == ScreenStatus::Unlocked) {
            if (!open) {
                open = ev.timestamp;
                if (!first_unlock) first_unlock = ev.timestamp;
            }
        } else if (status == ScreenStatus::Off || status == ScreenStatus::Locked) {
            if (open) {
                episodes.push_back(ev.timestamp - *open);
                open.reset();
            }
        }
    }
    if (open) episodes.push_back(std::max<std::int64_t>(0, day.end_ms - *open));

    FamilyValues<7> out;
    out[0] = count(episodes.size());
    const std::int64_t total = std::accumulate(episodes.begin(), episodes.end(), std::int64_t{0});
    out[1] = minutes(total);
    if (!episodes.empty()) {
        const auto [lo, hi] = std::minmax_element(episodes.begin(), episodes.end());
        const double mean = minutes(total) / count(episodes.size());
        double ss = 0;
        for (auto e : episodes) ss += (minutes(e) - mean) * (minutes(e) - mean);
        out[2] = minutes(*hi);
        out[3] = mean;
        out[4] = minutes(*lo);
        out[5] = std::sqrt(ss / count(episodes.size()));
        out[6] = minutes(*first_unlock - day.start_ms);
    }
    return out;
}

// ---- daily dispatch ----------------------------------------------------------

namespace {

template <std::size_t N>
void place(FeatureValues& values, int first_id, const FamilyValues<N>& family) {
    for (std::size_t i = 0; i < N; ++i) values[static_cast<std::size_t>(first_id - 1) + i] = family[i];
}

} // namespace

DailyFeatureVector extract_daily_features(const DayEvents& day, const DayContext& ctx) {
    DailyFeatureVector v;
    v.participant_id = ctx.participant_id;
    v.date = ctx.date;
    const DayWindow window = DayWindow::of(ctx.date, ctx.tz);

    if (const auto& s = day[SensorKind::Application]; !s.empty()) place(v.values, 1, app_features(s));
    if (const auto& s = day[SensorKind::Battery]; !s.empty()) place(v.values, 21, battery_features(s));
    if (const auto& s = day[SensorKind::Call]; !s.empty()) place(v.values, 23, call_features(s));
    if (const auto& s = day[SensorKind::Keyboard]; !s.empty())
        place(v.values, 38, keyboard_features(s, ctx.params.keyboard_session_gap_ms));
    if (const auto& s = day[SensorKind::Location]; !s.empty()) {
        try {
            const auto fixes = to_fixes(s);
            const auto clustering = cluster_locations(fixes, ctx.params, ctx.home);
            place(v.values, 45, location_features(clustering, ctx.home.has_value()));
        } catch (const InsufficientData&) {
            // the whole location family stays missing
        }
    }
    if (const auto& s = day[SensorKind::Message]; !s.empty()) place(v.values, 65, message_features(s));
    if (const auto& s = day[SensorKind::Screen]; !s.empty()) place(v.values, 71, screen_features(s, window));
    return v;
}

std::vector<DailyFeatureVector> extract_participant_features(const ParticipantStreams& streams, Date first, int days,
                                                             TzOffset tz, const FeatureParams& params) {
    check_tz(tz);
    // Home detection reads the whole window before any per-day location features.
    const std::int64_t window_begin = day_start_ms(first, tz);
    const std::int64_t window_end = window_begin + static_cast<std::int64_t>(days) * kDayMs;
    const auto& locations = streams[SensorKind::Location];
    EventStream window_fixes;
    for (const auto& ev : locations)
        if (ev.timestamp >= window_begin && ev.timestamp < window_end) window_fixes.push_back(ev);
    const std::optional<LatLon> home = detect_home(window_fixes, tz, params);

    std::vector<DailyFeatureVector> out;
    out.reserve(static_cast<std::size_t>(std::max(days, 0)));
    for (int i = 0; i < days; ++i) {
        const Date date = add_days(first, i);
        DayEvents day;
        for (SensorKind kind : kAllSensorKinds) day[kind] = slice_day(streams[kind], date, tz);
        out.push_back(extract_daily_features(day, DayContext{streams.participant_id, date, tz, params, home}));
    }
    return out;
}

} // namespace affectsense
