#pragma once

#include <stdexcept>
#include <string>

namespace ratelattice {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data (CSV, JSON, config files).
struct ParseError : Error {
    using Error::Error;
};

// Structurally well-formed input that violates a documented invariant
// (unsorted maturities, non-positive yields, bad parameter ranges, ...).
struct ValidationError : Error {
    using Error::Error;
};

// A calibration step failed to converge or left its admissible domain.
struct CalibrationError : Error {
    using Error::Error;
};

// Pricing/inversion failures (e.g. a call price outside no-arbitrage bounds).
struct PricingError : Error {
    using Error::Error;
};

// Scenario configuration problems (missing fields, conflicting modes).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace ratelattice
