#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ratelattice/lattice.hpp"
#include "ratelattice/market_data.hpp"

namespace ratelattice {

struct SolverConfig {
    double abs_tol = 1e-12;    // max absolute residual at convergence
    int max_iter = 200;        // iteration budget per solve
    double bracket_lo = 1e-6;  // initial one-period-rate bracket
    double bracket_hi = 1.0;
};

// Which power of the target yield volatility beta(n) the ternary variance of
// the level-1 sub-bond yields is matched to during ZBDT calibration:
//   variance — ternary variance = beta(n)^2 (dimensionally consistent; the
//              lattice degenerates exactly to the binary one as p -> 0),
//   level    — ternary variance = beta(n) itself (the convention under which
//              the reference tables in tests/fixtures were generated).
enum class BetaTarget { variance, level };

// Diagnostics for one calibration step (lattice period n-1, maturity n).
struct StepSolution {
    int maturity = 0;
    std::vector<double> rates;     // calibrated one-period rates, low to high
    double sigma = 0.0;            // log-rate step volatility sigma(n)
    double price_residual = 0.0;   // root bond price minus target (price units)
    double beta_residual = 0.0;    // volatility-matching equation residual
    double anchor_residual = 0.0;  // ladder anchoring equation residual (ZBDT)
    int iterations = 0;
    bool restarted = false;
};

// Central variance of the three-point log-rate distribution taking the
// values (lu, ld, 0) with weights ((1-p)/2, (1-p)/2, p):
//   (1-p^2)/4 (lu^2 + ld^2) - (1-p)^2/2 lu ld.
// At p = 0 this is the binary half-spread squared, ((lu-ld)/2)^2.
double ternary_variance(double lu, double ld, double p);

// Bracketed scalar root find (regula falsi with an Illinois safeguard and
// bisection fallback); requires a sign change on [lo, hi]; converges to
// |f| <= cfg.abs_tol. Throws CalibrationError otherwise.
double solve_scalar(const std::function<double(double)>& f, double lo, double hi,
                    const SolverConfig& cfg, int* iterations = nullptr);

// Damped Newton iteration with central finite-difference sensitivities for a
// three-equation system. The step is halved until the residual norm falls
// and `admissible` (when given) accepts the iterate. Converges to
// max|f_i| <= cfg.abs_tol; throws CalibrationError otherwise.
std::array<double, 3> solve_system(
    const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f,
    std::array<double, 3> start, const SolverConfig& cfg,
    const std::function<bool(const std::array<double, 3>&)>& admissible = {},
    int* iterations = nullptr);

// Bootstrap the binary lattice from a market view: period n-1 carries the
// geometric ladder r_j = r_1 e^{2 sigma(n) (j-1)}, with (r_1, sigma(n))
// chosen so the root price of the n-period bond matches y(n) and the half
// log-spread of the level-1 sub-bond yields matches beta(n).
BdtLattice calibrate_bdt(const CalibrationInput& input, const SolverConfig& cfg = {},
                         std::vector<StepSolution>* steps = nullptr);

// Bootstrap the extended lattice. Unknowns per step: (r_1, r_2, sigma(n));
// nodes j >= 2 ladder geometrically from r_2; three equations: the root
// price, the ternary variance of the level-1 sub-bond yields against
// beta(n) (see BetaTarget), and the anchoring equation
//   sigma(n)^2 = ternary_variance(log(r_2/x0), log(r_1/x0), p).
ZbdtLattice calibrate_zbdt(const CalibrationInput& input, const ZbdtParams& params,
                           BetaTarget target = BetaTarget::variance,
                           const SolverConfig& cfg = {},
                           std::vector<StepSolution>* steps = nullptr);

// Recover the market view a lattice reproduces: y(n) from the root n-bond
// price; beta(n) from the level-1 sub-bond yields — (1/2) log(yu/yd) for the
// binary lattice; for the extended lattice the ternary variance of the
// sub-bond log-yields against the ZIRP node's yield, reported as sqrt(v)
// under BetaTarget::variance or v itself under BetaTarget::level.
CalibrationInput extract_market_view(const BdtLattice& lattice, std::string as_of = {});
CalibrationInput extract_market_view(const ZbdtLattice& lattice,
                                     BetaTarget target = BetaTarget::variance,
                                     std::string as_of = {});

}  // namespace ratelattice
