#pragma once

#include "ratelattice/errors.hpp"
#include "ratelattice/lattice.hpp"

namespace ratelattice {

struct EuropeanCallSpec {
    double strike = 0.0;    // strike on the bond's dollar price
    int expiry = 0;         // option expiry S, in periods (>= 1)
    int bond_maturity = 0;  // underlying zero-coupon bond maturity T > S
    double face = kFace;

    void validate(int lattice_periods) const;  // throws ValidationError
};

struct OptionQuote {
    EuropeanCallSpec spec;
    double price = 0.0;
    double implied_vol = 0.0;  // exactly 0 whenever price is 0
};

// Expected discounted payoff max(B(S, node) - strike, 0) of a European call
// on the T-period zero-coupon bond, by backward induction with the lattice's
// own branch weights and one-period rates. On the extended lattice the
// expiry-date ZIRP node is a payoff node like any other.
double price_call_on_lattice(const BdtLattice& lattice, const EuropeanCallSpec& spec);
double price_call_on_lattice(const ZbdtLattice& lattice, const EuropeanCallSpec& spec);

// Black's formula for a call on a discount bond:
//   C = b_t Phi(d1) - strike * b_s Phi(d2),
//   d_{1,2} = log(b_t / (strike * b_s)) / (sigma sqrt(tau)) +- sigma sqrt(tau) / 2,
// where b_t discounts the bond maturity and b_s the option expiry.
// sigma = 0 returns the limit max(b_t - strike * b_s, 0).
double black_price(double b_t, double b_s, double strike, double sigma, double tau);

// Invert black_price in sigma by bisection over [1e-9, 20], converging until
// both the price gap is within 1e-10 and the bracketing interval is narrower
// than 1e-10 (the gap alone under-determines sigma where vega is tiny).
// Prices at or below 1e-12 map to exactly 0. Prices at or above b_t (the
// sigma -> infinity limit) or below the sigma -> 0 intrinsic value have no
// solution and throw PricingError.
double implied_vol(double call_price, double b_t, double b_s, double strike, double tau);

}  // namespace ratelattice
