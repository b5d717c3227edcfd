#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "sentdyn/error.hpp"
#include "sentdyn/rng.hpp"
#include "sentdyn/temporal.hpp"

using namespace sentdyn;
using fixtures::comment;
using fixtures::submission;

namespace {

constexpr std::int64_t kDay = 86400;
const std::int64_t kMarch1 = Date::parse("2020-03-01").days * kDay;

DailySeries series_of(std::vector<double> v, const std::string& start = "2020-03-01") {
    DailySeries s;
    s.start = Date::parse(start);
    s.values = std::move(v);
    return s;
}

EventCalendar calendar(std::initializer_list<const char*> dates) {
    EventCalendar c;
    for (const char* d : dates) c.events.push_back({Date::parse(d), d});
    return c;
}

// Type 7 as written in Hyndman and Fan: j = floor(np + m), m = 1 - p, 1-based.
double hf_type7(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    const double m = 1.0 - p;
    const double j = std::floor(n * p + m);
    const double g = n * p + m - j;
    auto at = [&](double k) { return x[static_cast<std::size_t>(std::clamp(k, 1.0, n)) - 1]; };
    return (1.0 - g) * at(j) + g * at(j + 1.0);
}

// Type 1: smallest order statistic whose empirical CDF reaches p.
double hf_type1(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (static_cast<double>(k + 1) / static_cast<double>(x.size()) >= p - 1e-15) return x[k];
    }
    return x.back();
}

WeightedSentimentSet day_fixture(const std::vector<std::vector<double>>& days) {
    WeightedSentimentSet ws;
    for (std::size_t d = 0; d < days.size(); ++d) ws.by_day[Date::parse("2020-03-01") + static_cast<std::int64_t>(d)] = days[d];
    return ws;
}

} // namespace

TEST_CASE("dates") {
    CHECK(Date::parse("1970-01-01").days == 0);
    CHECK(Date::parse("2020-03-01").str() == "2020-03-01");
    CHECK(Date::parse("2021-01-01") - Date::parse("2020-01-01") == 366);
    CHECK(Date::from_epoch_seconds(kMarch1 + kDay - 1) == Date::parse("2020-03-01"));
    CHECK(Date::from_epoch_seconds(kMarch1 + kDay) == Date::parse("2020-03-02"));
    CHECK(Date::from_epoch_seconds(-1) == Date::parse("1969-12-31"));
    CHECK_THROWS_AS(Date::parse("2020-02-30"), DataError);
    CHECK_THROWS_AS(Date::parse("20200301"), DataError);
}

TEST_CASE("daily_counts") {
    const Corpus c = Corpus::from_posts({
        submission("s", "x", kMarch1 + 10, Topic::mask),
        comment("a", "s", "y", kMarch1 + 20, Topic::mask),
        comment("b", "s", "y", kMarch1 + 2 * kDay + 5, Topic::mask),
        comment("o", "s", "y", kMarch1 + 2 * kDay + 6, Topic::lockdown),
        comment("late", "s", "y", kMarch1 + 9 * kDay, Topic::mask),
    });
    const DailySeries s = daily_counts(c, Topic::mask, Date::parse("2020-03-01"), Date::parse("2020-03-04"));
    CHECK(s.values == std::vector<double>{2, 0, 1, 0});
    CHECK(s.end() == Date::parse("2020-03-05"));
    double total = 0;
    for (double v : s.values) total += v;
    CHECK(total == 3); // the post outside the window is not counted
}

TEST_CASE("rolling_mean") {
    CHECK(rolling_mean(std::vector<double>(20, 7.0)) == std::vector<double>(20, 7.0));
    CHECK(rolling_mean({0.0, 14.0}, 2) == std::vector<double>{0.0, 7.0});
    CHECK_THROWS(rolling_mean({}, 14));
    CHECK_THROWS(rolling_mean({1.0}, 0));

    Rng rng(3);
    std::vector<double> month(31);
    for (auto& v : month) v = static_cast<double>(rng.index(100));

    SUBCASE("window 1 is the identity") { CHECK(rolling_mean(month, 1) == month); }
    SUBCASE("trailing window matches brute-force sums") {
        const auto r = rolling_mean(month, 14);
        for (std::size_t d = 0; d < month.size(); ++d) {
            double sum = 0;
            int n = 0;
            for (std::size_t k = 0; k < month.size(); ++k) {
                if (k <= d && d - k < 14) {
                    sum += month[k];
                    ++n;
                }
            }
            CHECK(r[d] == doctest::Approx(sum / n).epsilon(1e-12));
        }
    }
    SUBCASE("centered window matches brute-force sums") {
        for (std::size_t w : {5u, 14u}) {
            const auto r = rolling_mean(month, w, RollingAlignment::centered);
            // Even windows take the extra day from the past.
            const long before = static_cast<long>(w / 2);
            const long after = static_cast<long>(w - 1) - before;
            for (long d = 0; d < static_cast<long>(month.size()); ++d) {
                double sum = 0;
                int n = 0;
                for (long k = d - before; k <= d + after; ++k) {
                    if (k >= 0 && k < static_cast<long>(month.size())) {
                        sum += month[static_cast<std::size_t>(k)];
                        ++n;
                    }
                }
                CHECK(r[static_cast<std::size_t>(d)] == doctest::Approx(sum / n).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("event calendar") {
    std::istringstream ok("# events\n2020-03-18\tfirst lockdown\n\n2020-05-04\treopening phase 1a\n");
    const auto cal = read_event_calendar(ok);
    REQUIRE(cal.events.size() == 2);
    CHECK(cal.events[1].date == Date::parse("2020-05-04"));
    CHECK(cal.events[1].label == "reopening phase 1a");

    std::istringstream bad_order("2020-05-04\tb\n2020-03-18\ta\n");
    CHECK_THROWS_AS(read_event_calendar(bad_order), DataError);
    std::istringstream same_day("2020-05-04\tb\n2020-05-04\ta\n");
    CHECK_THROWS_AS(read_event_calendar(same_day), DataError);
    std::istringstream no_tab("2020-05-04 b\n");
    CHECK_THROWS_AS(read_event_calendar(no_tab), DataError);
}

TEST_CASE("piecewise_trend") {
    SUBCASE("exact line") {
        std::vector<double> v;
        for (int t = 0; t < 10; ++t) v.push_back(2.0 * t + 3.0);
        const auto segs = piecewise_trend(series_of(v), {});
        REQUIRE(segs.size() == 1);
        CHECK(segs[0].fitted);
        CHECK(std::abs(segs[0].slope - 2.0) < 1e-9);
        CHECK(std::abs(segs[0].intercept - 3.0) < 1e-9);
    }
    SUBCASE("constant") {
        const auto segs = piecewise_trend(series_of(std::vector<double>(6, 4.0)), {});
        CHECK(std::abs(segs[0].slope) < 1e-12);
        CHECK(std::abs(segs[0].intercept - 4.0) < 1e-12);
    }
    SUBCASE("three points by hand") {
        const auto segs = piecewise_trend(series_of({0.0, 1.0, 3.0}), {});
        CHECK(std::abs(segs[0].slope - 1.5) < 1e-12);
        CHECK(std::abs(segs[0].intercept + 1.0 / 6.0) < 1e-12);
    }
    SUBCASE("half-open segments with their own origin") {
        // Days 0-2 follow t, days 3-6 follow 10 - 2(t - 3).
        const auto segs = piecewise_trend(series_of({0, 1, 2, 10, 8, 6, 4}), calendar({"2020-03-04", "2020-04-01"}));
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].points == 3);
        CHECK(segs[1].begin == Date::parse("2020-03-04"));
        CHECK(segs[1].points == 4);
        CHECK(std::abs(segs[0].slope - 1.0) < 1e-12);
        CHECK(std::abs(segs[1].slope + 2.0) < 1e-12);
        CHECK(std::abs(segs[1].intercept - 10.0) < 1e-12);
    }
    SUBCASE("single-point segment is reported, not fitted") {
        const auto segs = piecewise_trend(series_of({1, 2, 3, 4}), calendar({"2020-03-04"}));
        REQUIRE(segs.size() == 2);
        CHECK_FALSE(segs[1].fitted);
        CHECK(segs[1].points == 1);
        CHECK(segs[0].fitted);
    }
    SUBCASE("residuals are orthogonal to the regressors") {
        Rng rng(11);
        std::vector<double> v(60);
        for (auto& x : v) x = 1000.0 * rng.uniform();
        const auto segs = piecewise_trend(series_of(v), calendar({"2020-03-11", "2020-03-30", "2020-04-20"}));
        for (const auto& s : segs) {
            const auto off = static_cast<std::size_t>(s.begin - Date::parse("2020-03-01"));
            double r1 = 0.0;
            double rt = 0.0;
            for (std::size_t t = 0; t < s.points; ++t) {
                const double r = v[off + t] - (s.intercept + s.slope * static_cast<double>(t));
                r1 += r;
                rt += r * static_cast<double>(t);
            }
            CHECK(std::abs(r1) < 1e-8);
            CHECK(std::abs(rt) < 1e-8);
        }
    }
}

TEST_CASE("quantiles") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(1 + rng.index(40));
        for (auto& v : x) v = rng.uniform(-5, 5);
        const double p = rng.uniform();
        CHECK(std::abs(quantile(x, p) - hf_type7(x, p)) < 1e-12);
        CHECK(quantile(x, p, QuantileType::type1) == hf_type1(x, p));
    }
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(median({5.0, 1.0, 3.0}) == 3.0);
    CHECK_THROWS(quantile({}, 0.5));
}

TEST_CASE("negative_days") {
    SUBCASE("volume gate") {
        const auto ws = day_fixture({std::vector<double>(49, -1.0), std::vector<double>(60, 1.0)});
        CHECK(negative_days(ws, {0.275, 50}).empty());
    }
    SUBCASE("three positive days and one negative day") {
        const auto ws = day_fixture({std::vector<double>(50, 1.0), std::vector<double>(50, -1.0),
                                     std::vector<double>(50, 1.0), std::vector<double>(50, 1.0)});
        // 200 values, 50 at -1: type-7 position 199 * 0.275 = 54.7 lies among the +1 values.
        CHECK(hf_type7(ws.all_values(), 0.275) == 1.0);
        CHECK(negative_days(ws, {0.275, 50}) == std::vector<Date>{Date::parse("2020-03-02")});
    }
    SUBCASE("identical days flag nothing") {
        const auto ws = day_fixture({std::vector<double>(50, 0.3), std::vector<double>(50, 0.3)});
        CHECK(negative_days(ws, {0.275, 50}).empty());
    }
    SUBCASE("q = 0 flags nothing") {
        Rng rng(8);
        std::vector<std::vector<double>> days(10);
        for (auto& d : days) {
            for (int k = 0; k < 60; ++k) d.push_back(rng.uniform(-3, 3));
        }
        CHECK(negative_days(day_fixture(days), {0.0, 50}).empty());
    }
    SUBCASE("monotone in q") {
        Rng rng(21);
        std::vector<std::vector<double>> days(30);
        for (std::size_t d = 0; d < days.size(); ++d) {
            const double shift = rng.uniform(-1, 1);
            for (int k = 0; k < 40 + static_cast<int>(rng.index(40)); ++k) days[d].push_back(shift + rng.normal());
        }
        const auto ws = day_fixture(days);
        std::set<Date> prev;
        for (double q = 0.05; q <= 0.95; q += 0.05) {
            const auto flagged = negative_days(ws, {q, 50});
            const std::set<Date> now(flagged.begin(), flagged.end());
            CHECK(std::includes(now.begin(), now.end(), prev.begin(), prev.end()));
            prev = now;
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS(negative_days(WeightedSentimentSet{}, {}));
        CHECK_THROWS(negative_days(day_fixture({{1.0}}), {0.5, 0}));
    }
}

TEST_CASE("weighted sentiments use score times sentiment per UTC day") {
    const Corpus c = Corpus::from_posts({
        submission("s", "x", kMarch1 + 1, Topic::mask, 0.5, 4),
        comment("a", "s", "y", kMarch1 + kDay, Topic::mask, -0.25, -2),
        comment("b", "s", "y", kMarch1 + kDay + 1, Topic::mask, std::nullopt, 9),
    });
    const auto ws = weighted_sentiments(c, Topic::mask);
    CHECK(ws.size() == 2);
    CHECK(ws.by_day.at(Date::parse("2020-03-01")) == std::vector<double>{2.0});
    CHECK(ws.by_day.at(Date::parse("2020-03-02")) == std::vector<double>{0.5});
}
