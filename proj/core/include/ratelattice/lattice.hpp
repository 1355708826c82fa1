#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ratelattice/errors.hpp"

namespace ratelattice {

inline constexpr double kFace = 100.0;

// Recombining binomial short-rate lattice with equal branch weights 1/2.
// rates[i] holds the i-th period's one-period rates (decimal), one per node
// j = 1..i+1 ordered from the lowest node upward: rate(i, j) = rates[i][j-1].
struct BdtLattice {
    std::vector<std::vector<double>> rates;

    int periods() const { return static_cast<int>(rates.size()); }
    double rate(int i, int j) const;  // node (i, j), j = 1..i+1
    void validate() const;            // shape, positivity, monotone in j
};

// Parameters of the binary-ternary extension:
//   p  — probability of the crisis branch from each lowest regular node
//        into the ZIRP (zero-interest-rate-policy) state,
//   q  — per-period probability of leaving the ZIRP state back into the
//        lowest regular node,
//   x0 — the near-zero one-period rate paid while in the ZIRP state.
// Each lowest regular node branches (up, mid, crisis) with weights
// ((1-p)/2, (1-p)/2, p); all higher nodes stay binary with weights (1/2, 1/2).
struct ZbdtParams {
    double p = 0.02;
    double q = 0.07;
    double x0 = 0.0025;

    double regular_weight() const { return 0.5 * (1.0 - p); }
    void validate() const;
};

// The extended lattice: the same regular-node triangle as BdtLattice plus a
// single ZIRP state per period at rate x0 (not stored per node).
struct ZbdtLattice {
    std::vector<std::vector<double>> rates;  // regular nodes only
    ZbdtParams params;

    int periods() const { return static_cast<int>(rates.size()); }
    double rate(int i, int j) const;  // regular node (i, j), j = 1..i+1
    void validate() const;  // as BdtLattice, plus rate(i,1) > x0 everywhere
};

// Node values of a zero-coupon bond on one of the lattices. Rows 0..maturity:
//   - binary lattice:  values[i] has i+1 entries, at(i, j) = values[i][j-1];
//   - with ZIRP state: values[0] = {root}; for i >= 1 values[i] has i+2
//     entries, index 0 = ZIRP node, index j = regular node j.
// The terminal row holds the face value at every node.
struct PriceLattice {
    int maturity = 0;
    double face = kFace;
    bool has_zirp = false;
    std::vector<std::vector<double>> values;

    double root() const;
    double at(int i, int j) const;   // regular node, j = 1..i+1
    double zirp(int i) const;        // ZIRP node, 1 <= i <= maturity
};

// Backward-induction bond prices for a maturity-period zero-coupon bond.
PriceLattice price_bond_bdt(const BdtLattice& lattice, int maturity, double face = kFace);
PriceLattice price_bond_zbdt(const ZbdtLattice& lattice, int maturity, double face = kFace);

// Annually-compounded yield of a zero-coupon bond price over m periods:
// (face/price)^(1/m) - 1.
double node_yield(double price, int periods_to_maturity, double face = kFace);

// Machine serialization (full precision):
//   {"periods": n, "rates": [[...], ...]}              for BdtLattice
//   { ..., "zirp": {"p": ..., "q": ..., "x0": ...}}    for ZbdtLattice
std::string to_json(const BdtLattice& lattice);
std::string to_json(const ZbdtLattice& lattice);
BdtLattice bdt_lattice_from_json(std::string_view text);
ZbdtLattice zbdt_lattice_from_json(std::string_view text);

// Human-readable pyramid (percent for rates, two decimals), highest node
// first, one column per period; the ZIRP row, when present, is last.
std::string render_rates(const BdtLattice& lattice);
std::string render_rates(const ZbdtLattice& lattice);
std::string render_prices(const PriceLattice& prices);

}  // namespace ratelattice
