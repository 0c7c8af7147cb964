#include "affectsense/random.hpp"
#include "affectsense/textualize.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>

using namespace affectsense;

namespace {

DailyFeatureVector day_of(const char* date) {
    DailyFeatureVector v;
    v.participant_id = "p1";
    v.date = parse_date(date);
    return v;
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("day rendering with a single feature") {
    auto v = day_of("2023-08-02");
    v.at(71) = 5;
    const auto text = render_day(v);
    CHECK(text.rfind("2023-08-02 00:00:00 to 2023-08-02 23:59:59", 0) == 0);
    CHECK(text.find("the number of unlock episodes is 5") != std::string::npos);
    CHECK(occurrences(text, " data was recorded.") == 6);
    CHECK(render_day(v) == text);
}

TEST_CASE("all-missing day is a header and seven no-data sentences") {
    const auto text = render_day(day_of("2023-08-02"));
    CHECK(text ==
          "2023-08-02 00:00:00 to 2023-08-02 23:59:59\n"
          "No application data was recorded.\n"
          "No battery data was recorded.\n"
          "No call data was recorded.\n"
          "No keyboard data was recorded.\n"
          "No location data was recorded.\n"
          "No message data was recorded.\n"
          "No screen data was recorded.");
}

TEST_CASE("value formatting and units") {
    CHECK(format_feature_value(5) == "5");
    CHECK(format_feature_value(0) == "0");
    CHECK(format_feature_value(2.345) == "2.35");
    CHECK(format_feature_value(-0.001) == "0.00");
    auto v = day_of("2023-08-02");
    v.at(48) = 4166;
    v.at(59) = 9.876;
    v.at(74) = 8;
    const auto text = render_day(v);
    CHECK(text.find("total travelled distance is 4166 meters.") != std::string::npos);
    CHECK(text.find("average speed during movement between locations is 9.88 km/h.") != std::string::npos);
    CHECK(text.find("average time of unlock episodes is 8 minutes.") != std::string::npos);
}

TEST_CASE("week assembly") {
    std::vector<DailyFeatureVector> days;
    for (int i = 6; i >= 0; --i) {
        auto v = day_of("2023-08-01");
        v.date = add_days(v.date, i);
        v.at(2) = i;
        days.push_back(v);
    }
    const auto week = render_week(days, 3);
    CHECK(week.days.size() == 7);
    CHECK(week.week_index == 3);
    CHECK(occurrences(week.full_text, " 00:00:00 to ") == 7);
    CHECK(week.full_text.find("2023-08-01 00:00:00") < week.full_text.find("2023-08-07 00:00:00"));
    CHECK(week.full_text.find("23:59:59\n") != std::string::npos);
    CHECK(week.approx_token_count == week.full_text.size() / 4);

    CHECK_THROWS_AS(render_week(std::span(days).first(6)), WrongDayCount);
    days[0].date = add_days(days[0].date, 3);
    CHECK_THROWS_AS(render_week(days), NonConsecutiveDates);
}

TEST_CASE("every present feature appears once") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        auto v = day_of("2024-02-29");
        for (int id = 1; id <= 77; ++id)
            if (rng.below(3)) v.at(id) = std::round(rng.uniform(0, 500) * 100) / 100;
        const auto text = render_day(v);
        for (const auto& f : feature_catalog()) {
            const std::string sentence = "\n" + std::string(f.name) + " is ";
            CHECK(occurrences(text, sentence) == (v.get(f.id) ? 1u : 0u));
        }
        for (Family fam : kAllFamilies)
            CHECK(occurrences(text, "No " + std::string(family_noun(fam)) + " data") ==
                  (v.family_missing(fam) ? 1u : 0u));
    }
}

TEST_CASE("parse inverts render at rendered precision") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        auto v = day_of("2023-12-31");
        for (int id = 1; id <= 77; ++id) {
            if (rng.below(4) == 0) continue;
            v.at(id) = rng.below(2) ? static_cast<double>(rng.below(1000)) : rng.uniform(-50, 5000);
        }
        const auto parsed = parse_day(render_day(v));
        CHECK(parsed.date == v.date);
        for (int id = 1; id <= 77; ++id) {
            const auto& a = v.get(id);
            const auto& b = parsed.values[static_cast<std::size_t>(id - 1)];
            REQUIRE(a.has_value() == b.has_value());
            if (a) CHECK(std::abs(*a - *b) <= 0.005 + 1e-9);
        }
        for (Family fam : kAllFamilies) CHECK(parsed.missing_families.count(fam) == (v.family_missing(fam) ? 1u : 0u));
    }
    CHECK_THROWS_AS(parse_day("2023-12-31 00:00:00 to 2023-12-31 23:59:59\nsomething else entirely"), Error);
}
