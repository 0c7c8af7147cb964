#include "affectsense/features.hpp"
#include "affectsense/random.hpp"

#include "doctest.h"
#include "feature_oracle.hpp"
#include "helpers.hpp"

#include <cmath>
#include <numeric>

using namespace affectsense;
using testing::at;

namespace {

const char* kDay = "2023-08-02";

SensorEvent app(const std::string& pkg, std::int64_t start, std::int64_t minutes, CategorySet cats) {
    ApplicationPayload a;
    a.package = pkg;
    a.episode_start = start;
    a.episode_end = start + minutes * kMinuteMs;
    a.categories = cats;
    return {start, a};
}

SensorEvent key(std::int64_t t, int before, int after, const char* pkg = "com.chat") {
    return {t, KeyboardPayload{pkg, before, after}};
}

SensorEvent screen(std::int64_t t, ScreenStatus s) { return {t, ScreenPayload{s}}; }

SensorEvent fix(std::int64_t t, double lat, double lon, std::optional<double> speed = 0.0) {
    return {t, LocationPayload{lat, lon, 5.0, speed}};
}

// Point `meters` east of (lat, lon).
LatLon east(LatLon p, double meters) {
    return {p.lat, p.lon + meters / (kEarthRadiusM * std::cos(p.lat * M_PI / 180.0)) * 180.0 / M_PI};
}

double val(const auto& family, int index) {
    REQUIRE(family[static_cast<std::size_t>(index)].has_value());
    return *family[static_cast<std::size_t>(index)];
}

} // namespace

TEST_CASE("catalog shape") {
    const auto cat = feature_catalog();
    CHECK(cat.size() == 77);
    const std::array<int, 7> sizes = {20, 2, 15, 7, 20, 6, 7};
    for (std::size_t i = 0; i < kAllFamilies.size(); ++i) {
        const auto [lo, hi] = family_range(kAllFamilies[i]);
        CHECK(hi - lo + 1 == sizes[i]);
        for (int id = lo; id <= hi; ++id) CHECK(feature_info(id).family == kAllFamilies[i]);
    }
    CHECK(feature_info(58).name == "radius of Gyration (RoG) indicating the area covered");
    CHECK_THROWS(feature_info(78));
}

TEST_CASE("application features") {
    const auto yt = category_bit(AppCategory::YouTube);
    const EventStream two_yt = {app("yt", at(kDay, 9), 10, yt), app("yt", at(kDay, 10), 20, yt)};
    const auto f = app_features(two_yt);
    CHECK(val(f, 8) == 2);  // item 9
    CHECK(val(f, 18) == 30); // item 19
    CHECK(val(f, 1) == 2);
    CHECK(val(f, 11) == 30);

    const auto empty = app_features({});
    for (const auto& v : empty) CHECK(v == 0.0);

    const auto other = category_bit(AppCategory::Other);
    const EventStream tie = {app("B", at(kDay, 8), 30, other), app("A", at(kDay, 9), 30, other)};
    const auto t = app_features(tie);
    CHECK(val(t, 7) == 1);
    CHECK(val(t, 17) == 30);
}

TEST_CASE("scaling app durations scales only the duration items") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = oracle::random_stream(SensorKind::Application, rng, at(kDay, 0), 30);
        EventStream scaled = s;
        for (auto& ev : scaled) {
            auto a = ev.as<ApplicationPayload>();
            a.episode_end = a.episode_start + 3 * a.duration_ms();
            ev.payload = a;
        }
        const auto f1 = app_features(s);
        const auto f3 = app_features(scaled);
        for (int i = 0; i < 10; ++i) CHECK(*f3[i] == *f1[i]);
        for (int i = 10; i < 20; ++i) CHECK(*f3[i] == doctest::Approx(3 * *f1[i]).epsilon(1e-12));
    }
}

TEST_CASE("battery runs") {
    auto stream = [](std::initializer_list<BatteryStatus> statuses) {
        EventStream s;
        std::int64_t t = 0;
        for (auto st : statuses) s.push_back({t += 1000, BatteryPayload{50, st}});
        return s;
    };
    using B = BatteryStatus;
    auto f = battery_features(stream({B::Discharging, B::Discharging, B::Charging, B::Discharging}));
    CHECK(val(f, 0) == 2);
    CHECK(val(f, 1) == 1);
    f = battery_features(stream({B::Charging}));
    CHECK(val(f, 0) == 0);
    CHECK(val(f, 1) == 1);
    f = battery_features({});
    CHECK_FALSE(f[0].has_value());
    CHECK_FALSE(f[1].has_value());
}

TEST_CASE("call features") {
    const EventStream s = {{1, CallPayload{CallType::Incoming, 60, "A"}},
                           {2, CallPayload{CallType::Incoming, 120, "A"}},
                           {3, CallPayload{CallType::Missed, 0, "B"}}};
    const auto f = call_features(s);
    auto item = [&](int id) { return val(f, id - 23); };
    CHECK(item(26) == 2);
    CHECK(item(27) == 1);
    CHECK(item(28) == 90);
    CHECK(item(29) == 180);
    CHECK(item(30) == 60);
    CHECK(item(31) == 2);
    CHECK(item(23) == 1);
    CHECK(item(24) == 1);
    CHECK(item(25) == 1);
    // no outgoing calls: counts zero, mean and mode missing
    CHECK(item(32) == 0);
    CHECK(item(35) == 0);
    CHECK_FALSE(f[34 - 23].has_value());
    CHECK_FALSE(f[36 - 23].has_value());

    auto mode_of = [](std::initializer_list<int> secs) {
        EventStream e;
        std::int64_t t = 0;
        for (int d : secs) e.push_back({++t, CallPayload{CallType::Outgoing, d, "c"}});
        return *call_features(e)[36 - 23];
    };
    CHECK(mode_of({30, 30, 90}) == 30);
    CHECK(mode_of({90, 30}) == 30);
}

TEST_CASE("message features") {
    const EventStream s = {{1, MessagePayload{MessageType::Received, "A"}},
                           {2, MessagePayload{MessageType::Received, "A"}},
                           {3, MessagePayload{MessageType::Received, "B"}},
                           {4, MessagePayload{MessageType::Sent, "B"}}};
    const auto f = message_features(s);
    CHECK(val(f, 66 - 65) == 3);
    CHECK(val(f, 67 - 65) == 2);
    CHECK(val(f, 65 - 65) == 2);
    CHECK(val(f, 69 - 65) == 1);
    CHECK(val(f, 70 - 65) == 1);
    CHECK(val(f, 68 - 65) == 1);

    const auto recv_only = message_features(EventStream{{1, MessagePayload{MessageType::Received, "A"}}});
    CHECK(val(recv_only, 69 - 65) == 0);
    CHECK(val(recv_only, 70 - 65) == 0);
    CHECK(val(recv_only, 68 - 65) == 0);
    for (const auto& v : message_features({})) CHECK_FALSE(v.has_value());
}

TEST_CASE("keyboard features") {
    const std::int64_t t0 = at(kDay, 10);
    auto f = keyboard_features(EventStream{key(t0, 0, 1), key(t0 + 1000, 1, 2), key(t0 + 3000, 2, 3)});
    CHECK(val(f, 0) == 3);
    CHECK(val(f, 1) == 3);
    CHECK(val(f, 2) == 0);
    CHECK(val(f, 3) == 0);
    CHECK(val(f, 5) == 1);
    CHECK(val(f, 6) == doctest::Approx(1.5));
    CHECK(val(f, 4) == 3);

    f = keyboard_features(EventStream{key(t0, 5, 3)});
    CHECK(val(f, 2) == 1);
    CHECK(val(f, 1) == 0);
    CHECK(val(f, 3) == 0);
    CHECK_FALSE(f[6].has_value()); // a single keystroke has no gaps

    f = keyboard_features(EventStream{key(t0, 0, 1), key(t0 + 10000, 1, 2)});
    CHECK(val(f, 5) == 2);

    // a package switch starts a new session even within the gap
    f = keyboard_features(EventStream{key(t0, 0, 1), key(t0 + 1000, 0, 1, "com.mail")});
    CHECK(val(f, 5) == 2);
}

TEST_CASE("screen features") {
    const auto day = DayWindow::of(parse_date(kDay), {});
    auto f = screen_features(EventStream{screen(at(kDay, 9), ScreenStatus::Unlocked),
                                         screen(at(kDay, 9, 10), ScreenStatus::Locked)},
                             day);
    CHECK(val(f, 0) == 1);
    CHECK(val(f, 1) == 10);
    CHECK(val(f, 3) == 10);
    CHECK(val(f, 6) == 540);

    EventStream three;
    int m = 0;
    for (int len : {2, 4, 6}) {
        three.push_back(screen(at(kDay, 12, m), ScreenStatus::Unlocked));
        three.push_back(screen(at(kDay, 12, m + len), ScreenStatus::Off));
        m += 10;
    }
    f = screen_features(three, day);
    CHECK(val(f, 5) == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-12));
    CHECK(val(f, 5) == doctest::Approx(1.6330).epsilon(1e-4));
    CHECK(val(f, 2) == 6);
    CHECK(val(f, 4) == 2);

    f = screen_features(EventStream{screen(at(kDay, 23), ScreenStatus::Unlocked)}, day);
    CHECK(val(f, 0) == 1);
    CHECK(val(f, 1) == 60); // clipped at midnight
}

TEST_CASE("location clustering examples") {
    const FeatureParams params;
    const LatLon base{52.0, 4.3};
    std::vector<Fix> one_place;
    for (int i = 0; i < 8; ++i) one_place.push_back({at(kDay, 1, i * 10), base, 0.0});
    auto lc = cluster_locations(one_place, params);
    CHECK(lc.clusters.size() == 1);
    CHECK(lc.noise_count() == 0);
    auto f = location_features(lc, false);
    auto item = [&](int id) { return val(f, id - 45); };
    CHECK(item(58) == 0);
    CHECK(item(64) == 0);
    CHECK(item(52) == 0);
    CHECK(item(56) == 0);
    CHECK(item(63) == 1);
    CHECK(item(50) == 70);
    CHECK_FALSE(f[54 - 45].has_value());

    std::vector<Fix> two_groups;
    for (int i = 0; i < 6; ++i) two_groups.push_back({at(kDay, 1, i * 10), base, 0.0});
    for (int i = 0; i < 6; ++i) two_groups.push_back({at(kDay, 3, i * 10), east(base, 5000), 0.0});
    CHECK(cluster_locations(two_groups, params).clusters.size() == 2);

    std::vector<Fix> isolated;
    for (int i = 0; i < 3; ++i) isolated.push_back({at(kDay, 1, i * 10), east(base, 1000.0 * i), 0.0});
    lc = cluster_locations(isolated, params);
    CHECK(lc.clusters.empty());
    CHECK(lc.noise_count() == 3);
    CHECK(*location_features(lc, false)[60 - 45] == 100);

    CHECK_THROWS_AS(cluster_locations(std::vector<Fix>{one_place[0]}, params), InsufficientData);
}

TEST_CASE("radius of gyration and entropy of equal-dwell clusters") {
    const FeatureParams params;
    const LatLon base{0.0, 10.0}; // on the equator the east offset is exact along a great circle
    std::vector<Fix> fixes;
    for (int i = 0; i < 6; ++i) fixes.push_back({at(kDay, 1, i * 10), base, 0.0});
    for (int i = 0; i < 6; ++i) fixes.push_back({at(kDay, 2, i * 10), east(base, 1000), 0.0});
    fixes.push_back({at(kDay, 3), base, 0.0}); // closes the second stay so dwell is equal
    auto f = location_features(cluster_locations(fixes, params), false);
    CHECK(*f[58 - 45] == doctest::Approx(500.0).epsilon(1e-6));

    std::vector<Fix> four;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 5; ++i) four.push_back({at(kDay, 1 + c, i * 10), east(base, 2000.0 * c), 0.0});
    four.push_back({at(kDay, 5), east(base, 9000), 0.0});
    // Each cluster's last fix carries the 20-minute hop, keeping the dwell equal at 60 minutes.
    f = location_features(cluster_locations(four, params), false);
    CHECK(*f[63 - 45] == 4);
    CHECK(*f[64 - 45] == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(*f[52 - 45] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("home dwell") {
    const FeatureParams params;
    const LatLon home{52.0, 4.3};
    std::vector<Fix> fixes;
    for (int i = 0; i < 6; ++i) fixes.push_back({at(kDay, 1, i * 10), home, 0.0});
    fixes.push_back({at(kDay, 2), east(home, 3000), 0.0});
    auto f = location_features(cluster_locations(fixes, params, home), true);
    CHECK(*f[54 - 45] == 60);
    f = location_features(cluster_locations(fixes, params, east(home, 50000)), true);
    CHECK(*f[54 - 45] == 0);
}

TEST_CASE("home detection uses night dwell") {
    const FeatureParams params;
    const LatLon home{52.0, 4.3};
    const LatLon work = east(home, 4000);
    EventStream s;
    for (int i = 0; i < 12; ++i) s.push_back(fix(at(kDay, 1, i * 10), home.lat, home.lon));
    for (int i = 0; i < 30; ++i) s.push_back(fix(at(kDay, 9, i * 10), work.lat, work.lon));
    const auto detected = detect_home(s, {}, params);
    REQUIRE(detected);
    CHECK(haversine_m(*detected, home) < 1.0);
}

TEST_CASE("location invariants on random days") {
    Rng rng(99);
    const FeatureParams params;
    for (int trial = 0; trial < 150; ++trial) {
        const auto s = oracle::random_stream(SensorKind::Location, rng, at(kDay, 0), 50);
        if (s.size() < 2) continue;
        const auto lc = cluster_locations(to_fixes(s), params);
        std::int64_t dwell = 0;
        for (const auto& c : lc.clusters) dwell += c.dwell_ms;
        CHECK(dwell + lc.noise_ms() + lc.moving_ms() == lc.tracked_ms());
        CHECK(dwell <= lc.tracked_ms() - lc.moving_ms());
        for (std::size_t i = 0; i < lc.fixes.size(); ++i)
            CHECK(lc.assignment[i] < static_cast<int>(lc.clusters.size()));
        const auto f = location_features(lc, false);
        CHECK(*f[52 - 45] >= 0.0);
        CHECK(*f[52 - 45] <= 1.0 + 1e-12);
        CHECK(*f[60 - 45] >= 0.0);
        CHECK(*f[60 - 45] <= 100.0);

        // translating by a few hundred meters barely moves the radius of gyration
        EventStream moved = s;
        for (auto& ev : moved) {
            auto l = ev.as<LocationPayload>();
            l.latitude += 0.003;
            l.longitude += 0.004;
            ev.payload = l;
        }
        const auto g = location_features(cluster_locations(to_fixes(moved), params), false);
        const double rog = *f[58 - 45];
        const double rog_moved = *g[58 - 45];
        if (rog > 1.0) CHECK(std::abs(rog_moved - rog) / rog < 1e-3);
    }
}

TEST_CASE("daily dispatch marks empty families missing") {
    DayEvents day;
    DayContext ctx{"p1", parse_date(kDay), {}, {}, std::nullopt};
    auto v = extract_daily_features(day, ctx);
    for (const auto& x : v.values) CHECK_FALSE(x.has_value());

    day[SensorKind::Screen] = {screen(at(kDay, 9), ScreenStatus::Unlocked), screen(at(kDay, 9, 5), ScreenStatus::Off)};
    v = extract_daily_features(day, ctx);
    for (int id = 1; id <= 77; ++id) CHECK(v.get(id).has_value() == (id >= 71));

    day[SensorKind::Location] = {fix(at(kDay, 9), 52, 4.3)};
    v = extract_daily_features(day, ctx);
    CHECK(v.family_missing(Family::Locations));
}

TEST_CASE("full random days agree with the reference implementation") {
    Rng rng(2024);
    const Date date = parse_date(kDay);
    for (int trial = 0; trial < 25; ++trial) {
        DayEvents day;
        for (SensorKind kind : kAllSensorKinds) day[kind] = oracle::random_stream(kind, rng, at(kDay, 0), 50);
        const std::optional<LatLon> home =
            rng.below(2) ? std::optional<LatLon>(LatLon{52.0, 4.3}) : std::optional<LatLon>();
        const auto v = extract_daily_features(day, DayContext{"p", date, {}, {}, home});
        oracle::OracleContext octx;
        octx.day_start_ms = at(kDay, 0);
        octx.home = home;
        const auto o = oracle::daily_features(day, octx);
        for (int id = 1; id <= 77; ++id) {
            CAPTURE(id);
            REQUIRE(v.get(id).has_value() == o[static_cast<std::size_t>(id - 1)].has_value());
            if (!v.get(id)) continue;
            const double a = *v.get(id);
            const double b = *o[static_cast<std::size_t>(id - 1)];
            CHECK(std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1e-3}));
        }
    }
}

TEST_CASE("feature store round trip") {
    DailyFeatureVector d;
    d.participant_id = "p9";
    d.date = parse_date(kDay);
    d.at(1) = 3;
    d.at(28) = 91.123456789012345;
    d.at(62) = -4.5e-7;
    const std::vector<DailyFeatureVector> days{d};
    const auto back = parse_feature_csv(to_feature_csv(days), "p9");
    REQUIRE(back.size() == 1);
    CHECK(back[0].values == d.values);
    CHECK(back[0].date == d.date);
    CHECK(catalog_csv().rfind("id,name,family,unit\n", 0) == 0);
}
