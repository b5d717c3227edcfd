#include "sentdyn/temporal.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <stdexcept>

#include "sentdyn/error.hpp"

namespace sentdyn {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

Date Date::from_epoch_seconds(std::int64_t t) { return Date{floor_div(t, 86400)}; }

Date Date::parse(std::string_view iso) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto field = [&](std::string_view s, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' || !field(iso.substr(0, 4), y) ||
        !field(iso.substr(5, 2), m) || !field(iso.substr(8, 2), d)) {
        throw DataError("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw DataError("invalid date '" + std::string(iso) + "'");
    return Date{std::chrono::sys_days{ymd}.time_since_epoch().count()};
}

std::string Date::str() const {
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

DailySeries daily_counts(const Corpus& corpus, Topic topic, Date first, Date last) {
    if (last < first) throw std::invalid_argument("study window end precedes start");
    DailySeries s{topic, first, std::vector<double>(static_cast<std::size_t>(last - first + 1), 0.0)};
    for (const Post& p : corpus.posts()) {
        if (p.topic != topic) continue;
        const Date d = Date::from_epoch_seconds(p.created_utc);
        if (d < first || last < d) continue;
        s.values[static_cast<std::size_t>(d - first)] += 1.0;
    }
    return s;
}

std::vector<double> rolling_mean(const std::vector<double>& values, std::size_t window_days, RollingAlignment align) {
    if (values.empty()) throw std::invalid_argument("rolling_mean of an empty series");
    if (window_days == 0) throw std::invalid_argument("window must be at least one day");
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    const auto w = static_cast<std::ptrdiff_t>(window_days);
    std::vector<double> prefix(values.size() + 1, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) prefix[i + 1] = prefix[i] + values[i];

    std::vector<double> out(values.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::ptrdiff_t lo = 0;
        std::ptrdiff_t hi = 0; // inclusive
        if (align == RollingAlignment::trailing) {
            lo = i - w + 1;
            hi = i;
        } else {
            lo = i - w / 2;
            hi = i + (w - 1) / 2;
        }
        lo = std::max<std::ptrdiff_t>(lo, 0);
        hi = std::min<std::ptrdiff_t>(hi, n - 1);
        out[static_cast<std::size_t>(i)] = (prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)]) /
                                           static_cast<double>(hi - lo + 1);
    }
    return out;
}

EventCalendar read_event_calendar(std::istream& in) {
    EventCalendar cal;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("event calendar line " + std::to_string(line_no) + ": expected DATE<TAB>label");
        }
        const Date d = Date::parse(std::string_view(line).substr(0, tab));
        if (!cal.events.empty() && !(cal.events.back().date < d)) {
            throw DataError("event calendar line " + std::to_string(line_no) + ": dates must be strictly increasing");
        }
        cal.events.push_back({d, line.substr(tab + 1)});
    }
    return cal;
}

EventCalendar read_event_calendar_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open event calendar '" + path + "'");
    return read_event_calendar(in);
}

std::vector<TrendSegment> piecewise_trend(const DailySeries& series, const EventCalendar& breakpoints) {
    std::vector<Date> cuts{series.start};
    for (const auto& e : breakpoints.events) {
        if (series.start < e.date && e.date < series.end()) cuts.push_back(e.date);
    }
    cuts.push_back(series.end());

    std::vector<TrendSegment> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        TrendSegment seg{cuts[k], cuts[k + 1], static_cast<std::size_t>(cuts[k + 1] - cuts[k]), false, 0.0, 0.0};
        if (seg.points >= 2) {
            const auto offset = static_cast<std::size_t>(cuts[k] - series.start);
            const double n = static_cast<double>(seg.points);
            // Centre t to keep the normal equations well conditioned.
            const double t_mean = (n - 1.0) / 2.0;
            double y_mean = 0.0;
            for (std::size_t t = 0; t < seg.points; ++t) y_mean += series.values[offset + t];
            y_mean /= n;
            double sxy = 0.0;
            double sxx = 0.0;
            for (std::size_t t = 0; t < seg.points; ++t) {
                const double dt = static_cast<double>(t) - t_mean;
                sxy += dt * (series.values[offset + t] - y_mean);
                sxx += dt * dt;
            }
            seg.slope = sxy / sxx;
            seg.intercept = y_mean - seg.slope * t_mean;
            seg.fitted = true;
        }
        out.push_back(seg);
    }
    return out;
}

std::vector<double> WeightedSentimentSet::all_values() const {
    std::vector<double> out;
    for (const auto& [day, vals] : by_day) out.insert(out.end(), vals.begin(), vals.end());
    return out;
}

std::size_t WeightedSentimentSet::size() const {
    std::size_t n = 0;
    for (const auto& [day, vals] : by_day) n += vals.size();
    return n;
}

WeightedSentimentSet weighted_sentiments(const Corpus& corpus, Topic topic) {
    WeightedSentimentSet ws;
    ws.topic = topic;
    for (const Post& p : corpus.posts()) {
        if (p.topic != topic || !p.sentiment) continue;
        ws.by_day[Date::from_epoch_seconds(p.created_utc)].push_back(static_cast<double>(p.score) * *p.sentiment);
    }
    return ws;
}

double quantile(std::vector<double> values, double q, QuantileType type) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty set");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    if (type == QuantileType::type1) {
        const double k = std::ceil(n * q);
        const auto idx = static_cast<std::size_t>(std::max(k, 1.0)) - 1;
        return values[idx];
    }
    const double h = (n - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - std::floor(h)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5, QuantileType::type7); }

std::vector<Date> negative_days(const WeightedSentimentSet& ws, const NegativeDayConfig& cfg) {
    if (ws.size() == 0) throw std::invalid_argument("negative_days on an empty sentiment set");
    if (!(cfg.q >= 0.0 && cfg.q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
    if (cfg.min_posts == 0) throw std::invalid_argument("min_posts must be at least 1");
    const double threshold = quantile(ws.all_values(), cfg.q, cfg.quantile_type);
    std::vector<Date> out;
    for (const auto& [day, vals] : ws.by_day) {
        if (vals.size() < cfg.min_posts) continue;
        if (median(vals) < threshold) out.push_back(day);
    }
    return out;
}

} // namespace sentdyn
