#include "feature_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace oracle {

using namespace affectsense;

namespace {

constexpr double kMin = 60000.0;

void put(FeatureValues& v, int id, double x) { v[static_cast<std::size_t>(id - 1)] = x; }

// Count of the most frequent key, 0 for none.
std::size_t top_count(const std::vector<std::string>& keys) {
    std::size_t best = 0;
    for (const auto& k : keys) best = std::max<std::size_t>(best, std::count(keys.begin(), keys.end(), k));
    return best;
}

std::size_t distinct(const std::vector<std::string>& keys) {
    return std::set<std::string>(keys.begin(), keys.end()).size();
}

void applications(const EventStream& s, FeatureValues& v) {
    // item id of the count feature for each category; durations are id + 10
    const std::vector<std::pair<AppCategory, int>> slots = {
        {AppCategory::Email, 1},         {AppCategory::SocialMedia, 3},     {AppCategory::Dating, 4},
        {AppCategory::Social, 5},        {AppCategory::Entertainment, 6},   {AppCategory::FacebookMoments, 7},
        {AppCategory::YouTube, 9},       {AppCategory::Twitter, 10}};
    for (int id = 1; id <= 20; ++id) put(v, id, 0.0);
    double total = 0;
    for (const auto& ev : s) total += static_cast<double>(ev.as<ApplicationPayload>().episode_end -
                                                          ev.as<ApplicationPayload>().episode_start);
    put(v, 2, static_cast<double>(s.size()));
    put(v, 12, total / kMin);
    for (const auto& [cat, id] : slots) {
        double n = 0;
        double ms = 0;
        for (const auto& ev : s) {
            const auto& a = ev.as<ApplicationPayload>();
            if (a.categories & (1u << static_cast<int>(cat))) {
                n += 1;
                ms += static_cast<double>(a.episode_end - a.episode_start);
            }
        }
        put(v, id, n);
        put(v, id + 10, ms / kMin);
    }
    std::set<std::string> packages;
    for (const auto& ev : s) packages.insert(ev.as<ApplicationPayload>().package);
    std::string top;
    double top_ms = -1;
    for (const auto& p : packages) { // ascending, so the first maximum is the lexicographic winner
        double ms = 0;
        for (const auto& ev : s)
            if (ev.as<ApplicationPayload>().package == p)
                ms += static_cast<double>(ev.as<ApplicationPayload>().episode_end -
                                          ev.as<ApplicationPayload>().episode_start);
        if (ms > top_ms) {
            top_ms = ms;
            top = p;
        }
    }
    if (!packages.empty()) {
        double n = 0;
        for (const auto& ev : s) n += ev.as<ApplicationPayload>().package == top ? 1 : 0;
        put(v, 8, n);
        put(v, 18, top_ms / kMin);
    }
}

void battery(const EventStream& s, FeatureValues& v) {
    int d = 0;
    int c = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto st = s[i].as<BatteryPayload>().status;
        const bool run_start = i == 0 || s[i - 1].as<BatteryPayload>().status != st;
        if (!run_start) continue;
        d += st == BatteryStatus::Discharging;
        c += st == BatteryStatus::Charging;
    }
    put(v, 21, d);
    put(v, 22, c);
}

void calls(const EventStream& s, FeatureValues& v) {
    auto direction = [&](CallType type, std::vector<std::string>& who, std::vector<std::int64_t>& secs) {
        for (const auto& ev : s) {
            const auto& c = ev.as<CallPayload>();
            if (c.call_type != type) continue;
            who.push_back(c.contact_trace);
            secs.push_back(c.duration_s);
        }
    };
    std::vector<std::string> mw;
    std::vector<std::int64_t> ms;
    direction(CallType::Missed, mw, ms);
    put(v, 23, static_cast<double>(mw.size()));
    put(v, 24, static_cast<double>(distinct(mw)));
    put(v, 25, static_cast<double>(top_count(mw)));

    for (auto [type, base] : {std::pair{CallType::Incoming, 26}, std::pair{CallType::Outgoing, 32}}) {
        std::vector<std::string> who;
        std::vector<std::int64_t> secs;
        direction(type, who, secs);
        double sum = 0;
        for (auto x : secs) sum += static_cast<double>(x);
        put(v, base, static_cast<double>(secs.size()));
        put(v, base + 1, static_cast<double>(distinct(who)));
        put(v, base + 3, sum);
        put(v, base + 5, static_cast<double>(top_count(who)));
        if (!secs.empty()) {
            put(v, base + 2, sum / static_cast<double>(secs.size()));
            std::int64_t mode = 0;
            long best = -1;
            for (auto x : secs) {
                const long n = std::count(secs.begin(), secs.end(), x);
                if (n > best || (n == best && x < mode)) {
                    best = n;
                    mode = x;
                }
            }
            put(v, base + 4, static_cast<double>(mode));
        }
    }
}

void messages(const EventStream& s, FeatureValues& v) {
    std::vector<std::string> received;
    std::vector<std::string> sent;
    for (const auto& ev : s) {
        const auto& m = ev.as<MessagePayload>();
        (m.message_type == MessageType::Received ? received : sent).push_back(m.contact_trace);
    }
    put(v, 65, static_cast<double>(top_count(received)));
    put(v, 66, static_cast<double>(received.size()));
    put(v, 67, static_cast<double>(distinct(received)));
    put(v, 68, static_cast<double>(top_count(sent)));
    put(v, 69, static_cast<double>(sent.size()));
    put(v, 70, static_cast<double>(distinct(sent)));
}

void keyboard(const EventStream& s, FeatureValues& v, std::int64_t gap_ms) {
    std::vector<const SensorEvent*> typing;
    for (const auto& ev : s) {
        const auto& k = ev.as<KeyboardPayload>();
        if (k.text_length_after != k.text_length_before) typing.push_back(&ev);
    }
    auto delta = [](const SensorEvent* e) {
        return e->as<KeyboardPayload>().text_length_after - e->as<KeyboardPayload>().text_length_before;
    };
    put(v, 38, static_cast<double>(typing.size()));
    put(v, 39, static_cast<double>(std::count_if(typing.begin(), typing.end(), [&](auto e) { return delta(e) == 1; })));
    put(v, 40, static_cast<double>(std::count_if(typing.begin(), typing.end(), [&](auto e) { return delta(e) <= -2; })));
    put(v, 41, static_cast<double>(std::count_if(typing.begin(), typing.end(), [&](auto e) { return delta(e) == -1; })));

    // session index per typing event
    std::vector<int> session(typing.size(), 0);
    for (std::size_t i = 1; i < typing.size(); ++i) {
        const bool same = typing[i]->as<KeyboardPayload>().package == typing[i - 1]->as<KeyboardPayload>().package &&
                          typing[i]->timestamp - typing[i - 1]->timestamp <= gap_ms;
        session[i] = session[i - 1] + (same ? 0 : 1);
    }
    const int n_sessions = typing.empty() ? 0 : session.back() + 1;
    put(v, 43, n_sessions);
    if (n_sessions > 0) {
        double final_sum = 0;
        for (int sidx = 0; sidx < n_sessions; ++sidx) {
            std::int64_t last = 0;
            for (std::size_t i = 0; i < typing.size(); ++i)
                if (session[i] == sidx) last = typing[i]->as<KeyboardPayload>().text_length_after;
            final_sum += static_cast<double>(last);
        }
        put(v, 42, final_sum / n_sessions);
    }
    double gap_sum = 0;
    int gaps = 0;
    for (std::size_t i = 1; i < typing.size(); ++i) {
        if (session[i] != session[i - 1]) continue;
        gap_sum += static_cast<double>(typing[i]->timestamp - typing[i - 1]->timestamp) / 1000.0;
        ++gaps;
    }
    if (gaps > 0) put(v, 44, gap_sum / gaps);
}

void screen(const EventStream& s, FeatureValues& v, std::int64_t day_start) {
    const std::int64_t day_end = day_start + 24LL * 3600 * 1000;
    std::vector<std::pair<std::int64_t, std::int64_t>> episodes;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i].as<ScreenPayload>().status != ScreenStatus::Unlocked) {
            ++i;
            continue;
        }
        const std::int64_t begin = s[i].timestamp;
        std::size_t j = i + 1;
        while (j < s.size() && s[j].as<ScreenPayload>().status != ScreenStatus::Off &&
               s[j].as<ScreenPayload>().status != ScreenStatus::Locked)
            ++j;
        episodes.emplace_back(begin, j < s.size() ? s[j].timestamp : day_end);
        i = j + 1;
    }
    put(v, 71, static_cast<double>(episodes.size()));
    double total = 0;
    for (auto [a, b] : episodes) total += static_cast<double>(b - a) / kMin;
    put(v, 72, total);
    if (episodes.empty()) return;
    std::vector<double> mins;
    for (auto [a, b] : episodes) mins.push_back(static_cast<double>(b - a) / kMin);
    const double mean = total / static_cast<double>(mins.size());
    double ss = 0;
    for (double m : mins) ss += (m - mean) * (m - mean);
    put(v, 73, *std::max_element(mins.begin(), mins.end()));
    put(v, 74, mean);
    put(v, 75, *std::min_element(mins.begin(), mins.end()));
    put(v, 76, std::sqrt(ss / static_cast<double>(mins.size())));
    put(v, 77, static_cast<double>(episodes.front().first - day_start) / kMin);
}

std::vector<double> speeds_kmh(const std::vector<Fix>& f) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i].speed_mps) {
            out[i] = *f[i].speed_mps * 3.6;
            continue;
        }
        // forward segment, or the backward one for the last fix
        const std::size_t a = i + 1 < f.size() ? i : i - 1;
        const std::size_t b = a + 1;
        const double dt_s = static_cast<double>(f[b].t - f[a].t) / 1000.0;
        out[i] = dt_s > 0 ? haversine(f[a].pos, f[b].pos) / dt_s * 3.6 : 0.0;
    }
    return out;
}

void locations(const EventStream& s, FeatureValues& v, const OracleContext& ctx) {
    if (s.size() < 2) return;
    std::vector<Fix> f;
    for (const auto& ev : s) {
        const auto& l = ev.as<LocationPayload>();
        f.push_back({ev.timestamp, {l.latitude, l.longitude}, l.speed});
    }
    const std::size_t n = f.size();
    const auto speed = speeds_kmh(f);
    const auto label = dbscan_labels(f, ctx);
    std::vector<double> gap(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) gap[i] = static_cast<double>(f[i + 1].t - f[i].t);

    const int k = label.empty() ? 0 : std::max(-1, *std::max_element(label.begin(), label.end())) + 1;
    std::vector<double> dwell_min(static_cast<std::size_t>(k), 0.0);
    std::vector<LatLon> centroid(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        double lat = 0, lon = 0, m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (label[i] != c) continue;
            lat += f[i].pos.lat;
            lon += f[i].pos.lon;
            m += 1;
            dwell_min[static_cast<std::size_t>(c)] += gap[i] / kMin;
        }
        centroid[static_cast<std::size_t>(c)] = {lat / m, lon / m};
    }

    std::vector<double> sorted = dwell_min;
    std::sort(sorted.rbegin(), sorted.rend());
    auto nth = [&](std::size_t r) { return r < sorted.size() ? sorted[r] : 0.0; };
    put(v, 50, nth(0));
    put(v, 45, nth(1));
    put(v, 55, nth(2));
    put(v, 46, k ? sorted.front() : 0.0);
    put(v, 57, k ? sorted.back() : 0.0);
    double mean = 0;
    for (double d : dwell_min) mean += d;
    const double dwell_total = mean;
    mean = k ? mean / k : 0.0;
    double ss = 0;
    for (double d : dwell_min) ss += (d - mean) * (d - mean);
    put(v, 51, mean);
    put(v, 49, k ? std::sqrt(ss / k) : 0.0);

    double moving = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (label[i] == -2) moving += gap[i];
    const double stationary = static_cast<double>(f.back().t - f.front().t) - moving;
    if (stationary > 0) put(v, 47, moving / stationary);

    double path = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) path += haversine(f[i].pos, f[i + 1].pos);
    put(v, 48, path);

    std::vector<double> p(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c)
        p[static_cast<std::size_t>(c)] = dwell_total > 0 ? dwell_min[static_cast<std::size_t>(c)] / dwell_total : 1.0 / k;
    double h = 0;
    for (double pc : p)
        if (pc > 0) h -= pc * std::log(pc);
    put(v, 64, h);
    put(v, 52, k >= 2 ? h / std::log(static_cast<double>(k)) : 0.0);

    std::vector<double> mv;
    for (std::size_t i = 0; i < n; ++i)
        if (label[i] == -2) mv.push_back(speed[i]);
    if (!mv.empty()) {
        double m = 0;
        for (double x : mv) m += x;
        m /= static_cast<double>(mv.size());
        double var = 0;
        for (double x : mv) var += (x - m) * (x - m);
        put(v, 59, m);
        put(v, 53, var / static_cast<double>(mv.size()));
    }

    if (ctx.home) {
        int home = -1;
        double best = 0;
        for (int c = 0; c < k; ++c) {
            const double d = haversine(centroid[static_cast<std::size_t>(c)], *ctx.home);
            if (d <= ctx.eps_m && (home < 0 || d < best)) {
                home = c;
                best = d;
            }
        }
        put(v, 54, home >= 0 ? dwell_min[static_cast<std::size_t>(home)] : 0.0);
    }

    int transitions = 0;
    int prev = -1;
    for (int l : label) {
        if (l < 0) continue;
        if (prev >= 0 && l != prev) ++transitions;
        prev = l;
    }
    put(v, 56, transitions);

    double rog = 0;
    if (k > 0) {
        LatLon center{0, 0};
        for (int c = 0; c < k; ++c) {
            center.lat += p[static_cast<std::size_t>(c)] * centroid[static_cast<std::size_t>(c)].lat;
            center.lon += p[static_cast<std::size_t>(c)] * centroid[static_cast<std::size_t>(c)].lon;
        }
        for (int c = 0; c < k; ++c) {
            const double d = haversine(centroid[static_cast<std::size_t>(c)], center);
            rog += p[static_cast<std::size_t>(c)] * d * d;
        }
        rog = std::sqrt(rog);
    }
    put(v, 58, rog);

    put(v, 60, 100.0 * static_cast<double>(std::count(label.begin(), label.end(), -1)) / static_cast<double>(n));

    double wsum = 0;
    for (double g : gap) wsum += g;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = wsum > 0 ? gap[i] / wsum : 1.0 / static_cast<double>(n);
    // centroid as an offset from the first weighted fix
    std::size_t first = 0;
    while (first + 1 < n && w[first] == 0) ++first;
    LatLon mid = f[first].pos;
    for (std::size_t i = 0; i < n; ++i) {
        mid.lat += w[i] * (f[i].pos.lat - f[first].pos.lat);
        mid.lon += w[i] * (f[i].pos.lon - f[first].pos.lon);
    }
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = haversine(f[i].pos, mid);
        var += w[i] * d * d;
    }
    put(v, 61, var);
    if (var > 0) put(v, 62, std::log(var));
    put(v, 63, k);
}

} // namespace

double haversine(LatLon a, LatLon b) {
    const double r = 6371008.8;
    const double rad = M_PI / 180.0;
    const double x = std::sin((b.lat - a.lat) * rad / 2);
    const double y = std::sin((b.lon - a.lon) * rad / 2);
    const double h = x * x + std::cos(a.lat * rad) * std::cos(b.lat * rad) * y * y;
    return 2 * r * std::atan2(std::sqrt(h), std::sqrt(std::max(0.0, 1 - h)));
}

std::vector<int> dbscan_labels(const std::vector<Fix>& f, const OracleContext& ctx) {
    const std::size_t n = f.size();
    const auto speed = speeds_kmh(f);
    std::vector<bool> stationary(n);
    for (std::size_t i = 0; i < n; ++i) stationary[i] = speed[i] < ctx.stationary_kmh;

    std::vector<std::vector<bool>> near(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            near[i][j] = stationary[i] && stationary[j] && haversine(f[i].pos, f[j].pos) <= ctx.eps_m;
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!stationary[i]) continue;
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) count += near[i][j];
        core[i] = count >= std::max(ctx.min_samples, 1);
    }

    // connected components of core points by repeated relaxation
    std::vector<std::size_t> comp(n);
    for (std::size_t i = 0; i < n; ++i) comp[i] = i;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (core[i] && core[j] && near[i][j] && comp[j] < comp[i]) {
                    comp[i] = comp[j];
                    changed = true;
                }
    }
    std::map<std::size_t, int> number; // component root (lowest index) -> cluster id in index order
    for (std::size_t i = 0; i < n; ++i)
        if (core[i] && !number.count(comp[i])) number.emplace(comp[i], static_cast<int>(number.size()));

    std::vector<int> label(n, -2);
    for (std::size_t i = 0; i < n; ++i) {
        if (!stationary[i]) continue;
        if (core[i]) {
            label[i] = number.at(comp[i]);
            continue;
        }
        int best = -1;
        for (std::size_t j = 0; j < n; ++j)
            if (core[j] && near[i][j]) {
                const int id = number.at(comp[j]);
                if (best < 0 || id < best) best = id;
            }
        label[i] = best;
    }
    return label;
}

FeatureValues daily_features(const DayEvents& day, const OracleContext& ctx) {
    FeatureValues v{};
    if (!day[SensorKind::Application].empty()) applications(day[SensorKind::Application], v);
    if (!day[SensorKind::Battery].empty()) battery(day[SensorKind::Battery], v);
    if (!day[SensorKind::Call].empty()) calls(day[SensorKind::Call], v);
    if (!day[SensorKind::Keyboard].empty()) keyboard(day[SensorKind::Keyboard], v, ctx.keyboard_gap_ms);
    if (!day[SensorKind::Location].empty()) locations(day[SensorKind::Location], v, ctx);
    if (!day[SensorKind::Message].empty()) messages(day[SensorKind::Message], v);
    if (!day[SensorKind::Screen].empty()) screen(day[SensorKind::Screen], v, ctx.day_start_ms);
    return v;
}

// ---- random streams ----------------------------------------------------------

namespace {

std::vector<std::int64_t> random_times(Rng& rng, std::int64_t day_start, int n) {
    std::set<std::int64_t> t;
    while (static_cast<int>(t.size()) < n)
        t.insert(day_start + static_cast<std::int64_t>(rng.below(24ULL * 3600 * 1000)));
    return {t.begin(), t.end()};
}

const char* pick(Rng& rng, std::initializer_list<const char*> options) {
    return *(options.begin() + rng.below(options.size()));
}

} // namespace

EventStream random_stream(SensorKind kind, Rng& rng, std::int64_t day_start, int max_events) {
    const int n = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_events) + 1));
    EventStream out;
    switch (kind) {
    case SensorKind::Screen:
        for (auto t : random_times(rng, day_start, n))
            out.push_back({t, ScreenPayload{static_cast<ScreenStatus>(rng.below(4))}});
        break;
    case SensorKind::Battery: {
        const BatteryStatus statuses[] = {BatteryStatus::Charging, BatteryStatus::Discharging,
                                          BatteryStatus::NotCharging, BatteryStatus::Full};
        for (auto t : random_times(rng, day_start, n))
            out.push_back({t, BatteryPayload{static_cast<int>(rng.below(101)), statuses[rng.below(4)]}});
        break;
    }
    case SensorKind::Call:
        for (auto t : random_times(rng, day_start, n)) {
            const auto type = static_cast<CallType>(1 + rng.below(3));
            const std::int64_t d = type == CallType::Missed ? 0
                                   : rng.below(2)           ? 30 * static_cast<std::int64_t>(rng.below(5))
                                                            : static_cast<std::int64_t>(rng.below(600));
            out.push_back({t, CallPayload{type, d, pick(rng, {"a1", "b2", "c3", "d4"})}});
        }
        break;
    case SensorKind::Message:
        for (auto t : random_times(rng, day_start, n))
            out.push_back({t, MessagePayload{static_cast<MessageType>(1 + rng.below(2)), pick(rng, {"a1", "b2", "c3"})}});
        break;
    case SensorKind::Application:
        for (auto t : random_times(rng, day_start, n)) {
            ApplicationPayload a;
            a.package = pick(rng, {"com.a", "com.b", "com.c", "com.d", "com.e"});
            a.episode_start = t;
            // whole minutes half of the time so that package totals can tie
            const std::int64_t len = rng.below(2) ? 60000 * static_cast<std::int64_t>(rng.below(40))
                                                  : static_cast<std::int64_t>(rng.below(90 * 60000));
            a.episode_end = std::min<std::int64_t>(t + len, day_start + 24LL * 3600 * 1000);
            a.categories = static_cast<CategorySet>(rng.below(1u << kAppCategoryCount));
            if (a.categories == 0) a.categories = category_bit(AppCategory::Other);
            out.push_back({a.episode_start, a});
        }
        break;
    case SensorKind::Keyboard: {
        std::int64_t t = day_start + static_cast<std::int64_t>(rng.below(20ULL * 3600 * 1000));
        std::int64_t len = 0;
        const std::int64_t deltas[] = {-3, -2, -1, 0, 1, 1, 1, 2};
        for (int i = 0; i < n; ++i) {
            t += 200 + static_cast<std::int64_t>(rng.below(rng.below(4) ? 5000 : 30000));
            const std::int64_t before = rng.below(6) ? len : static_cast<std::int64_t>(rng.below(20));
            const std::int64_t after = std::max<std::int64_t>(0, before + deltas[rng.below(8)]);
            out.push_back({t, KeyboardPayload{pick(rng, {"com.chat", "com.chat", "com.mail"}), before, after}});
            len = after;
        }
        break;
    }
    case SensorKind::Location: {
        // a few places within a few km, visited in stretches, with travel in between
        std::vector<LatLon> places;
        const int n_places = 1 + static_cast<int>(rng.below(3));
        for (int i = 0; i < n_places; ++i)
            places.push_back({52.0 + rng.uniform(-0.02, 0.02), 4.3 + rng.uniform(-0.03, 0.03)});
        std::int64_t t = day_start + static_cast<std::int64_t>(rng.below(3600 * 1000));
        std::size_t at = 0;
        for (int i = 0; i < n; ++i) {
            if (rng.below(6) == 0) at = rng.below(places.size());
            LatLon p = places[at];
            if (rng.below(8) == 0) {
                p = {52.0 + rng.uniform(-0.05, 0.05), 4.3 + rng.uniform(-0.05, 0.05)}; // in transit
            } else if (rng.below(3)) {
                p.lat += rng.uniform(-0.0002, 0.0002);
                p.lon += rng.uniform(-0.0003, 0.0003);
            }
            std::optional<double> speed;
            if (rng.below(3) == 0) speed = rng.below(2) ? rng.uniform(0.0, 0.5) : rng.uniform(0.5, 15.0);
            out.push_back({t, LocationPayload{p.lat, p.lon, 10.0, speed}});
            t += 60000 * static_cast<std::int64_t>(1 + rng.below(25));
            if (t >= day_start + 24LL * 3600 * 1000) break;
        }
        break;
    }
    }
    return out;
}

} // namespace oracle
