#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sentdyn/corpus.hpp"

namespace sentdyn {

// UTC calendar day, stored as days since 1970-01-01.
struct Date {
    std::int64_t days = 0;

    static Date from_epoch_seconds(std::int64_t t);
    static Date parse(std::string_view iso); // YYYY-MM-DD
    std::string str() const;

    auto operator<=>(const Date&) const = default;
    Date operator+(std::int64_t n) const { return Date{days + n}; }
    std::int64_t operator-(Date other) const { return days - other.days; }
};

struct DailySeries {
    Topic topic = Topic::lockdown;
    Date start;
    std::vector<double> values; // one per day, contiguous from start

    Date end() const { return start + static_cast<std::int64_t>(values.size()); } // exclusive
};

// Posts on `topic` per UTC day over [first, last]; missing days are 0.
DailySeries daily_counts(const Corpus& corpus, Topic topic, Date first, Date last);

enum class RollingAlignment { trailing, centered };

// Mean over a window of `window_days` ending at (trailing) or centred on each
// day (an even centred window reaches one day further back than forward).
// Partial windows at the edges average the available days.
std::vector<double> rolling_mean(const std::vector<double>& values, std::size_t window_days = 14,
                                 RollingAlignment align = RollingAlignment::trailing);

struct EventDate {
    Date date;
    std::string label;
};

struct EventCalendar {
    std::vector<EventDate> events; // strictly increasing dates
};

// Plain text, one `YYYY-MM-DD<TAB>label` per line; blank lines and lines
// starting with '#' are skipped.
EventCalendar read_event_calendar(std::istream& in);
EventCalendar read_event_calendar_file(const std::string& path);

struct TrendSegment {
    Date begin;
    Date end; // exclusive
    std::size_t points = 0;
    bool fitted = false;
    double slope = 0.0;     // per day
    double intercept = 0.0; // value at `begin`
};

// Independent OLS line per half-open segment between consecutive breakpoints
// that fall inside the series. Segments with fewer than two points are
// returned unfitted.
std::vector<TrendSegment> piecewise_trend(const DailySeries& series, const EventCalendar& breakpoints);

struct WeightedSentimentSet {
    Topic topic = Topic::lockdown;
    std::map<Date, std::vector<double>> by_day; // score * sentiment

    std::vector<double> all_values() const;
    std::size_t size() const;
};

WeightedSentimentSet weighted_sentiments(const Corpus& corpus, Topic topic);

enum class QuantileType { type7, type1 };

// Empirical quantile of unsorted data; type 7 interpolates linearly between
// order statistics, type 1 inverts the empirical CDF.
double quantile(std::vector<double> values, double q, QuantileType type = QuantileType::type7);
double median(std::vector<double> values);

struct NegativeDayConfig {
    double q = 0.275;
    std::size_t min_posts = 50;
    QuantileType quantile_type = QuantileType::type7;
};

// Days whose median weighted sentiment lies strictly below the q-quantile of
// the whole set and that have at least min_posts values.
std::vector<Date> negative_days(const WeightedSentimentSet& ws, const NegativeDayConfig& cfg = {});

} // namespace sentdyn
