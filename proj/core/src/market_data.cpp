#include "ratelattice/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "json.hpp"

namespace ratelattice {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

double parse_double(std::string_view s, const std::string& context) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(context + ": cannot parse number '" + std::string(s) + "'");
    return value;
}

}  // namespace

Date Date::parse(std::string_view iso) {
    const auto fail = [&] {
        throw ParseError("invalid ISO date '" + std::string(iso) + "' (expected YYYY-MM-DD)");
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') fail();
    const std::string_view ys = iso.substr(0, 4), ms = iso.substr(5, 2), ds = iso.substr(8, 2);
    if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) fail();
    Date d;
    std::from_chars(ys.data(), ys.data() + ys.size(), d.year);
    std::from_chars(ms.data(), ms.data() + ms.size(), d.month);
    std::from_chars(ds.data(), ds.data() + ds.size(), d.day);
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) fail();
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

int YieldSeries::index_of(const Date& date) const {
    const auto it = std::lower_bound(
        observations.begin(), observations.end(), date,
        [](const YieldObservation& o, const Date& d) { return o.date < d; });
    if (it == observations.end() || it->date != date) return -1;
    return static_cast<int>(it - observations.begin());
}

std::vector<YieldSeries> parse_yield_csv(std::istream& in, YieldUnit unit) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("yield CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    if (header.size() < 2) throw ParseError("yield CSV: header needs a date column and at least one tenor");
    {
        std::string first(header[0]);
        std::transform(first.begin(), first.end(), first.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (first != "date")
            throw ParseError("yield CSV: first header column must be 'date', got '" + std::string(header[0]) + "'");
    }

    std::vector<YieldSeries> series(header.size() - 1);
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c].empty()) throw ParseError("yield CSV: empty tenor name in header");
        series[c - 1].tenor = std::string(header[c]);
    }

    const double scale = unit == YieldUnit::percent ? 0.01 : 1.0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        const std::string where = "yield CSV line " + std::to_string(line_no);
        if (cells.size() != header.size())
            throw ParseError(where + ": expected " + std::to_string(header.size()) +
                             " cells, got " + std::to_string(cells.size()));
        const Date date = Date::parse(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (cells[c].empty()) continue;  // missing observation for this tenor
            const double value = scale * parse_double(cells[c], where + ", tenor " + series[c - 1].tenor);
            if (value <= 0.0)
                throw ParseError(where + ", tenor " + series[c - 1].tenor +
                                 ": non-positive yield " + std::string(cells[c]));
            series[c - 1].observations.push_back({date, value});
        }
    }

    for (auto& s : series) {
        std::sort(s.observations.begin(), s.observations.end(),
                  [](const YieldObservation& a, const YieldObservation& b) { return a.date < b.date; });
        const auto dup = std::adjacent_find(
            s.observations.begin(), s.observations.end(),
            [](const YieldObservation& a, const YieldObservation& b) { return a.date == b.date; });
        if (dup != s.observations.end())
            throw ParseError("yield CSV: duplicate observation for tenor " + s.tenor +
                             " on " + dup->date.to_string());
    }
    return series;
}

std::vector<YieldSeries> parse_yield_csv(std::string_view text, YieldUnit unit) {
    std::istringstream in{std::string(text)};
    return parse_yield_csv(in, unit);
}

double rolling_volatility(const YieldSeries& series, const Date& t, int window,
                          VolNormalization norm) {
    if (window < 2) throw ValidationError("rolling_volatility: window must be at least 2");
    const int idx = series.index_of(t);
    if (idx < 0)
        throw ValidationError("rolling_volatility: date " + t.to_string() +
                              " not present in series " + series.tenor);
    if (idx < window) {
        const bool ever = static_cast<int>(series.observations.size()) > window;
        std::string msg = "rolling_volatility: series " + series.tenor + " has only " +
                          std::to_string(idx + 1) + " observations at or before " + t.to_string() +
                          ", need " + std::to_string(window + 1);
        if (ever)
            msg += "; earliest usable date is " + series.observations[window].date.to_string();
        throw ValidationError(msg);
    }

    // Two-pass mean/deviation computation over the window's log-returns.
    std::vector<double> returns(static_cast<std::size_t>(window));
    for (int i = 0; i < window; ++i) {
        const double cur = series.observations[idx - window + 1 + i].value;
        const double prev = series.observations[idx - window + i].value;
        returns[i] = std::log(cur / prev);
    }
    double mean = 0.0;
    for (const double r : returns) mean += r;
    mean /= window;
    double sum_sq = 0.0;
    for (const double r : returns) sum_sq += (r - mean) * (r - mean);

    if (norm == VolNormalization::sample) sum_sq /= window - 1;
    return std::sqrt(sum_sq);
}

const CalibrationEntry& CalibrationInput::at(int maturity) const {
    if (maturity < 1 || maturity > horizon())
        throw ValidationError("CalibrationInput: maturity " + std::to_string(maturity) +
                              " outside 1.." + std::to_string(horizon()));
    return entries[static_cast<std::size_t>(maturity - 1)];
}

void CalibrationInput::validate() const {
    if (entries.empty()) throw ValidationError("CalibrationInput: no entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const std::string tag = "CalibrationInput entry " + std::to_string(i);
        if (e.maturity != static_cast<int>(i) + 1)
            throw ValidationError(tag + ": maturities must be contiguous from 1, got k=" +
                                  std::to_string(e.maturity));
        if (!(e.yield > 0.0) || !std::isfinite(e.yield))
            throw ValidationError(tag + ": yield must be positive and finite");
        if (e.maturity >= 2 && (!(e.beta > 0.0) || !std::isfinite(e.beta)))
            throw ValidationError(tag + ": beta must be positive and finite for maturities >= 2");
    }
    if (window < 0) throw ValidationError("CalibrationInput: negative window");
}

CalibrationInput build_calibration_input(const std::vector<YieldSeries>& series,
                                         const Date& as_of, int window,
                                         VolNormalization norm) {
    CalibrationInput input;
    input.as_of = as_of.to_string();
    input.window = window;
    for (int k = 1; k <= 5; ++k) {
        const std::string tenor = std::to_string(k) + "Y";
        const auto it = std::find_if(series.begin(), series.end(),
                                     [&](const YieldSeries& s) { return s.tenor == tenor; });
        if (it == series.end())
            throw ValidationError("build_calibration_input: tenor " + tenor + " not found");
        const int idx = it->index_of(as_of);
        if (idx < 0)
            throw ValidationError("build_calibration_input: tenor " + tenor +
                                  " has no observation on " + as_of.to_string());
        CalibrationEntry entry;
        entry.maturity = k;
        entry.yield = it->observations[static_cast<std::size_t>(idx)].value;
        entry.beta = k >= 2 ? rolling_volatility(*it, as_of, window, norm) : 0.0;
        input.entries.push_back(entry);
    }
    input.validate();
    return input;
}

std::string to_json(const CalibrationInput& input) {
    nlohmann::json j;
    j["as_of"] = input.as_of;
    j["window"] = input.window;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : input.entries)
        j["entries"].push_back({{"k", e.maturity}, {"y", e.yield}, {"beta", e.beta}});
    return j.dump(2) + "\n";
}

CalibrationInput calibration_input_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("calibration input JSON: ") + e.what());
    }
    CalibrationInput input;
    try {
        input.as_of = j.value("as_of", std::string{});
        input.window = j.value("window", 0);
        for (const auto& e : j.at("entries")) {
            CalibrationEntry entry;
            entry.maturity = e.at("k").get<int>();
            entry.yield = e.at("y").get<double>();
            entry.beta = e.value("beta", 0.0);
            input.entries.push_back(entry);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("calibration input JSON: ") + e.what());
    }
    input.validate();
    return input;
}

}  // namespace ratelattice
