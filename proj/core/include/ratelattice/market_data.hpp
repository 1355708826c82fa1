#pragma once

#include <compare>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ratelattice/errors.hpp"

namespace ratelattice {

// Calendar date (ISO 8601, YYYY-MM-DD). Only parsing, ordering and
// formatting are needed: rolling windows count observations, not days.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    friend auto operator<=>(const Date&, const Date&) = default;

    static Date parse(std::string_view iso);  // throws ParseError
    std::string to_string() const;            // "YYYY-MM-DD"
};

struct YieldObservation {
    Date date;
    double value = 0.0;  // decimal yield (0.0136 = 1.36%)
};

// One tenor's observation history, sorted by date, strictly positive values.
struct YieldSeries {
    std::string tenor;  // column label, e.g. "1Y"
    std::vector<YieldObservation> observations;

    // Index of `date` in observations; -1 if absent.
    int index_of(const Date& date) const;
};

enum class YieldUnit { percent, decimal };

// Normalization of the rolling yield volatility:
//   window_sum — beta^2 is the plain sum of squared deviations of the
//                window's log-returns from their mean (no 1/N factor),
//   sample     — the sum divided by (window - 1).
enum class VolNormalization { window_sum, sample };

// Parse a daily yield-curve CSV: header `date,6M,1Y,2Y,...`, ISO dates, one
// row per day. Empty cells are skipped for that tenor only; rows may arrive
// in any order (each series is sorted on ingest); duplicate dates within a
// tenor and non-positive yields are rejected.
std::vector<YieldSeries> parse_yield_csv(std::istream& in, YieldUnit unit);
std::vector<YieldSeries> parse_yield_csv(std::string_view text, YieldUnit unit);

// Rolling yield volatility at observation date t, from the log-returns of
// the `window` most recent observation pairs ending at t:
//   beta^2 = sum_i (l_i - mean(l))^2        (VolNormalization::window_sum)
// Preconditions: t is present in the series and at least window+1
// observations exist at or before t (otherwise the error names the earliest
// usable date).
double rolling_volatility(const YieldSeries& series, const Date& t,
                          int window = 252,
                          VolNormalization norm = VolNormalization::window_sum);

struct CalibrationEntry {
    int maturity = 0;    // periods (years), starting at 1
    double yield = 0.0;  // decimal annually-compounded spot yield y(k)
    double beta = 0.0;   // yield volatility beta(k); 0 for maturity 1
};

// Market view consumed by the calibrators: spot yields and yield vols for
// contiguous maturities 1..n years.
struct CalibrationInput {
    std::string as_of;                      // ISO date label (may be empty)
    int window = 0;                         // vol window, 0 = not applicable
    std::vector<CalibrationEntry> entries;  // sorted, maturities 1..n

    int horizon() const { return static_cast<int>(entries.size()); }
    const CalibrationEntry& at(int maturity) const;
    void validate() const;  // throws ValidationError
};

// Assemble a CalibrationInput from the tenor series "1Y".."5Y" as of a given
// date. Other tenors (e.g. "6M") are ingested by the CSV parser but play no
// role in calibration.
CalibrationInput build_calibration_input(
    const std::vector<YieldSeries>& series, const Date& as_of,
    int window = 252, VolNormalization norm = VolNormalization::window_sum);

// JSON round-trip:
//   {"as_of": "...", "window": N, "entries": [{"k":1,"y":...,"beta":...}, ...]}
std::string to_json(const CalibrationInput& input);
CalibrationInput calibration_input_from_json(std::string_view text);

}  // namespace ratelattice
