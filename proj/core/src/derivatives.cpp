#include "ratelattice/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ratelattice {

namespace {

constexpr double kIntrinsicEps = 1e-12;  // prices at/below this count as zero
constexpr double kVolLo = 1e-9;
constexpr double kVolHi = 20.0;
constexpr double kPriceGapTol = 1e-10;
// The price gap alone is a poor stopping rule where vega is tiny, so the
// bracketing interval must also collapse before a root is accepted.
constexpr double kVolWidthTol = 1e-10;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

void EuropeanCallSpec::validate(int lattice_periods) const {
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw ValidationError("EuropeanCallSpec: strike must be positive");
    if (expiry < 1) throw ValidationError("EuropeanCallSpec: expiry must be at least 1 period");
    if (bond_maturity <= expiry)
        throw ValidationError("EuropeanCallSpec: bond maturity must exceed the option expiry");
    if (bond_maturity > lattice_periods)
        throw ValidationError("EuropeanCallSpec: bond maturity " + std::to_string(bond_maturity) +
                              " exceeds the lattice horizon " + std::to_string(lattice_periods));
    if (!(face > 0.0)) throw ValidationError("EuropeanCallSpec: face must be positive");
}

double price_call_on_lattice(const BdtLattice& lattice, const EuropeanCallSpec& spec) {
    spec.validate(lattice.periods());
    const PriceLattice bond = price_bond_bdt(lattice, spec.bond_maturity, spec.face);

    const int s = spec.expiry;
    std::vector<double> values(static_cast<std::size_t>(s) + 1);
    for (int j = 1; j <= s + 1; ++j)
        values[static_cast<std::size_t>(j - 1)] = std::max(bond.at(s, j) - spec.strike, 0.0);

    for (int i = s - 1; i >= 0; --i) {
        for (int j = 0; j <= i; ++j)
            values[static_cast<std::size_t>(j)] =
                0.5 * (values[static_cast<std::size_t>(j)] + values[static_cast<std::size_t>(j + 1)]) /
                (1.0 + lattice.rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        values.resize(static_cast<std::size_t>(i) + 1);
    }
    return values[0];
}

double price_call_on_lattice(const ZbdtLattice& lattice, const EuropeanCallSpec& spec) {
    spec.validate(lattice.periods());
    const PriceLattice bond = price_bond_zbdt(lattice, spec.bond_maturity, spec.face);

    const double p = lattice.params.p;
    const double q = lattice.params.q;
    const double x0 = lattice.params.x0;
    const double ph = lattice.params.regular_weight();

    // Payoff row at expiry: index 0 is the ZIRP node, index j a regular node.
    const int s = spec.expiry;
    std::vector<double> values(static_cast<std::size_t>(s) + 2);
    values[0] = std::max(bond.zirp(s) - spec.strike, 0.0);
    for (int j = 1; j <= s + 1; ++j)
        values[static_cast<std::size_t>(j)] = std::max(bond.at(s, j) - spec.strike, 0.0);

    for (int i = s - 1; i >= 0; --i) {
        std::vector<double> cur(static_cast<std::size_t>(i) + 2);
        cur[0] = (q * values[1] + (1.0 - q) * values[0]) / (1.0 + x0);
        cur[1] = (ph * values[2] + ph * values[1] + p * values[0]) /
                 (1.0 + lattice.rates[static_cast<std::size_t>(i)][0]);
        for (int j = 2; j <= i + 1; ++j)
            cur[static_cast<std::size_t>(j)] =
                0.5 * (values[static_cast<std::size_t>(j + 1)] + values[static_cast<std::size_t>(j)]) /
                (1.0 + lattice.rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)]);
        values = std::move(cur);
    }
    return values[1];  // the root is the lowest (ternary) regular node
}

double black_price(double b_t, double b_s, double strike, double sigma, double tau) {
    if (!(b_t > 0.0) || !(b_s > 0.0))
        throw ValidationError("black_price: discount factors must be positive");
    if (!(strike > 0.0)) throw ValidationError("black_price: strike must be positive");
    if (!(tau > 0.0)) throw ValidationError("black_price: tau must be positive");
    if (sigma < 0.0) throw ValidationError("black_price: sigma must be non-negative");

    if (sigma == 0.0) return std::max(b_t - strike * b_s, 0.0);

    const double st = sigma * std::sqrt(tau);
    const double d1 = std::log(b_t / (strike * b_s)) / st + 0.5 * st;
    const double d2 = d1 - st;
    return b_t * norm_cdf(d1) - strike * b_s * norm_cdf(d2);
}

double implied_vol(double call_price, double b_t, double b_s, double strike, double tau) {
    if (call_price <= kIntrinsicEps) return 0.0;

    if (call_price >= b_t)
        throw PricingError("implied_vol: price " + std::to_string(call_price) +
                           " is at or above the discounted face bound " + std::to_string(b_t));

    const auto gap = [&](double sigma) {
        return black_price(b_t, b_s, strike, sigma, tau) - call_price;
    };

    double lo = kVolLo, hi = kVolHi;
    double glo = gap(lo);
    if (std::fabs(glo) <= kPriceGapTol) return lo;
    if (glo > 0.0)
        throw PricingError("implied_vol: price lies below the zero-volatility intrinsic value");
    if (gap(hi) < 0.0)
        throw PricingError("implied_vol: no volatility at or below " + std::to_string(kVolHi) +
                           " reproduces the price");

    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gap(mid);
        if (std::fabs(gm) <= kPriceGapTol && hi - lo <= kVolWidthTol) return mid;
        (gm < 0.0 ? lo : hi) = mid;
    }
    throw PricingError("implied_vol: bisection failed to reach the price-gap tolerance");
}

}  // namespace ratelattice
