#include "ratelattice/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace ratelattice {

namespace {

constexpr double kMinRate = 1e-14;
constexpr double kMaxRate = 64.0;

// Discount-factor target for the n-period bond: 1/(1+y)^n (unit face).
double target_df(double y, int n) { return std::pow(1.0 + y, -n) ; }

struct SubYields {
    double root;  // unit-face root price of the maturity-m bond
    double yu;    // level-1 upper sub-bond yield
    double yd;    // level-1 lower sub-bond yield
    double y0;    // level-1 ZIRP sub-bond yield (extended lattice only)
};

SubYields bdt_sub_yields(const std::vector<std::vector<double>>& rows, int m) {
    const BdtLattice tmp{rows};
    const PriceLattice prices = price_bond_bdt(tmp, m, 1.0);
    SubYields s{};
    s.root = prices.root();
    s.yu = node_yield(prices.at(1, 2), m - 1, 1.0);
    s.yd = node_yield(prices.at(1, 1), m - 1, 1.0);
    s.y0 = 0.0;
    return s;
}

SubYields zbdt_sub_yields(const std::vector<std::vector<double>>& rows, const ZbdtParams& params,
                          int m) {
    const ZbdtLattice tmp{rows, params};
    const PriceLattice prices = price_bond_zbdt(tmp, m, 1.0);
    SubYields s{};
    s.root = prices.root();
    s.yu = node_yield(prices.at(1, 2), m - 1, 1.0);
    s.yd = node_yield(prices.at(1, 1), m - 1, 1.0);
    s.y0 = node_yield(prices.zirp(1), m - 1, 1.0);
    return s;
}

// Expand [lo, hi] until f (strictly decreasing in substance) changes sign.
void expand_decreasing_bracket(const std::function<double(double)>& f, double& lo, double& hi) {
    for (int k = 0; k < 60 && f(lo) < 0.0; ++k) lo = std::max(lo * 0.25, kMinRate);
    for (int k = 0; k < 60 && f(hi) > 0.0; ++k) hi = std::min(hi * 2.0, kMaxRate);
    if (f(lo) < 0.0 || f(hi) > 0.0)
        throw CalibrationError("calibration: could not bracket the one-period rate");
}

void solve_3x3(double a[3][3], double b[3], double x[3]) {
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(a[perm[r]][col]) > std::fabs(a[perm[pivot]][col])) pivot = r;
        std::swap(perm[col], perm[pivot]);
        const double diag = a[perm[col]][col];
        if (std::fabs(diag) < 1e-300)
            throw CalibrationError("solve_system: singular Jacobian");
        for (int r = col + 1; r < 3; ++r) {
            const double factor = a[perm[r]][col] / diag;
            for (int c = col; c < 3; ++c) a[perm[r]][c] -= factor * a[perm[col]][c];
            b[perm[r]] -= factor * b[perm[col]];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double sum = b[perm[row]];
        for (int c = row + 1; c < 3; ++c) sum -= a[perm[row]][c] * x[c];
        x[row] = sum / a[perm[row]][row];
    }
}

double max_abs(const std::array<double, 3>& v) {
    return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
}

}  // namespace

double ternary_variance(double lu, double ld, double p) {
    return (1.0 - p * p) / 4.0 * (lu * lu + ld * ld) - (1.0 - p) * (1.0 - p) / 2.0 * lu * ld;
}

double solve_scalar(const std::function<double(double)>& f, double lo, double hi,
                    const SolverConfig& cfg, int* iterations) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (iterations) *iterations = 2;
    if (std::fabs(fa) <= cfg.abs_tol) return a;
    if (std::fabs(fb) <= cfg.abs_tol) return b;
    if (fa * fb > 0.0)
        throw CalibrationError("solve_scalar: no sign change over the bracket");

    int last_side = 0;  // Illinois bookkeeping: which endpoint was retained
    for (int it = 0; it < cfg.max_iter; ++it) {
        double x = b - fb * (b - a) / (fb - fa);  // regula falsi
        const double mid = 0.5 * (a + b);
        if (!std::isfinite(x) || x <= std::min(a, b) || x >= std::max(a, b)) x = mid;
        const double fx = f(x);
        if (iterations) ++*iterations;
        if (std::fabs(fx) <= cfg.abs_tol) return x;
        if (fa * fx < 0.0) {
            b = x;
            fb = fx;
            if (last_side == -1) fa *= 0.5;  // stagnating on the a side
            last_side = -1;
        } else {
            a = x;
            fa = fx;
            if (last_side == +1) fb *= 0.5;
            last_side = +1;
        }
        if (std::fabs(b - a) < 1e-17 * std::max(1.0, std::fabs(b))) break;
    }
    throw CalibrationError("solve_scalar: residual tolerance not reached");
}

std::array<double, 3> solve_system(
    const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f,
    std::array<double, 3> start, const SolverConfig& cfg,
    const std::function<bool(const std::array<double, 3>&)>& admissible, int* iterations) {
    const auto ok = [&](const std::array<double, 3>& x) { return !admissible || admissible(x); };
    if (!ok(start)) throw CalibrationError("solve_system: inadmissible starting point");

    std::array<double, 3> x = start;
    std::array<double, 3> fx = f(x);
    if (iterations) *iterations = 0;

    for (int it = 0; it < cfg.max_iter; ++it) {
        if (iterations) *iterations = it + 1;
        const double norm = max_abs(fx);
        if (norm <= cfg.abs_tol) return x;

        // Central finite-difference Jacobian.
        double jac[3][3];
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-6 * std::max(1.0, std::fabs(x[k]));
            std::array<double, 3> xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const auto fp = f(xp), fm = f(xm);
            for (int r = 0; r < 3; ++r) jac[r][k] = (fp[r] - fm[r]) / (2.0 * h);
        }

        double rhs[3] = {-fx[0], -fx[1], -fx[2]};
        double step[3];
        solve_3x3(jac, rhs, step);

        // Damped line search: halve until admissible and strictly improving.
        bool accepted = false;
        for (double t = 1.0; t >= 1e-7; t *= 0.5) {
            const std::array<double, 3> cand = {x[0] + t * step[0], x[1] + t * step[1],
                                                x[2] + t * step[2]};
            if (!ok(cand)) continue;
            const auto fc = f(cand);
            if (max_abs(fc) < norm) {
                x = cand;
                fx = fc;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw CalibrationError("solve_system: damped step made no progress");
    }
    if (max_abs(fx) <= cfg.abs_tol) return x;
    throw CalibrationError("solve_system: residual tolerance not reached");
}

BdtLattice calibrate_bdt(const CalibrationInput& input, const SolverConfig& cfg,
                         std::vector<StepSolution>* steps) {
    input.validate();
    const int n = input.horizon();

    std::vector<std::vector<double>> rows;
    rows.push_back({input.at(1).yield});
    if (steps) steps->push_back({1, rows[0], 0.0, 0.0, 0.0, 0.0, 0, false});

    double sigma_prev = 0.0;
    for (int m = 2; m <= n; ++m) {
        const double y = input.at(m).yield;
        const double beta = input.at(m).beta;
        const double df = target_df(y, m);

        // Inner solve: for a given sigma, the ladder r_j = r_1 e^{2 sigma (j-1)}
        // has a root price strictly decreasing in r_1.
        const auto rate_for_sigma = [&](double sigma) {
            const auto price_gap = [&](double r1) {
                std::vector<double> row(static_cast<std::size_t>(m));
                for (int j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] = r1 * std::exp(2.0 * sigma * j);
                rows.push_back(std::move(row));
                const double root = bdt_sub_yields(rows, m).root;
                rows.pop_back();
                return root - df;
            };
            double lo = cfg.bracket_lo, hi = cfg.bracket_hi;
            expand_decreasing_bracket(price_gap, lo, hi);
            return solve_scalar(price_gap, lo, hi, cfg);
        };

        const auto row_for = [&](double sigma) {
            const double r1 = rate_for_sigma(sigma);
            std::vector<double> row(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] = r1 * std::exp(2.0 * sigma * j);
            return row;
        };

        // Outer solve: the half log-spread of the level-1 sub-bond yields is
        // strictly increasing in sigma.
        const auto beta_gap = [&](double sigma) {
            rows.push_back(row_for(sigma));
            const SubYields s = bdt_sub_yields(rows, m);
            rows.pop_back();
            return 0.5 * std::log(s.yu / s.yd) - beta;
        };

        double lo = 1e-9;
        double hi = std::max(m == 2 ? 2.0 * beta : 2.0 * sigma_prev, 0.05);
        for (int k = 0; beta_gap(hi) < 0.0 && k < 40; ++k) hi *= 2.0;

        int iters = 0;
        const double sigma = solve_scalar(beta_gap, lo, hi, cfg, &iters);
        rows.push_back(row_for(sigma));
        sigma_prev = sigma;

        if (steps) {
            const SubYields s = bdt_sub_yields(rows, m);
            StepSolution step;
            step.maturity = m;
            step.rates = rows.back();
            step.sigma = sigma;
            step.price_residual = (s.root - df) * kFace;
            step.beta_residual = 0.5 * std::log(s.yu / s.yd) - beta;
            step.anchor_residual = 0.0;
            step.iterations = iters;
            steps->push_back(std::move(step));
        }
    }

    BdtLattice lattice{std::move(rows)};
    lattice.validate();
    return lattice;
}

ZbdtLattice calibrate_zbdt(const CalibrationInput& input, const ZbdtParams& params,
                           BetaTarget target, const SolverConfig& cfg,
                           std::vector<StepSolution>* steps) {
    input.validate();
    params.validate();
    const int n = input.horizon();
    const double p = params.p;
    const double x0 = params.x0;

    if (input.at(1).yield <= x0)
        throw CalibrationError("calibrate_zbdt: y(1) must exceed the ZIRP rate x0");

    std::vector<std::vector<double>> rows;
    rows.push_back({input.at(1).yield});
    if (steps) steps->push_back({1, rows[0], 0.0, 0.0, 0.0, 0.0, 0, false});

    // Unknowns per step: u = (log r_1, log r_2, sigma).
    std::array<double, 3> prev{};
    for (int m = 2; m <= n; ++m) {
        const double y = input.at(m).yield;
        const double beta = input.at(m).beta;
        const double beta_goal = target == BetaTarget::variance ? beta * beta : beta;
        const double df = target_df(y, m);

        const auto ladder = [&](const std::array<double, 3>& u) {
            const double r1 = std::exp(u[0]);
            const double r2 = std::exp(u[1]);
            std::vector<double> row(static_cast<std::size_t>(m));
            row[0] = r1;
            for (int j = 2; j <= m; ++j)
                row[static_cast<std::size_t>(j - 1)] = r2 * std::exp(2.0 * u[2] * (j - 2));
            return row;
        };

        const auto residuals = [&](const std::array<double, 3>& u) -> std::array<double, 3> {
            rows.push_back(ladder(u));
            const SubYields s = zbdt_sub_yields(rows, params, m);
            rows.pop_back();
            const double r1 = std::exp(u[0]);
            const double r2 = std::exp(u[1]);
            return {
                s.root - df,
                ternary_variance(std::log(s.yu / s.y0), std::log(s.yd / s.y0), p) - beta_goal,
                ternary_variance(std::log(r2 / x0), std::log(r1 / x0), p) - u[2] * u[2],
            };
        };

        // Keep the lowest rate above the ZIRP rate and sigma positive; the
        // damped line search rejects iterates outside this domain.
        const auto admissible = [&](const std::array<double, 3>& u) {
            const double r1 = std::exp(u[0]);
            const double r2 = std::exp(u[1]);
            return r1 > x0 && r1 < kMaxRate && r2 < kMaxRate && u[2] > 0.0;
        };

        std::array<double, 3> seed;
        if (m == 2) {
            const double b0 = std::max(beta, 0.05);
            seed = {std::log(y), std::log(y) + 2.0 * b0, b0};
        } else {
            seed = prev;
        }

        const auto attempt = [&](const std::array<double, 3>& s0, int* iters) {
            return solve_system(residuals, s0, cfg, admissible, iters);
        };

        std::array<double, 3> u{};
        int iters = 0;
        bool restarted = false;
        try {
            u = attempt(seed, &iters);
        } catch (const CalibrationError&) {
            restarted = true;
        }
        if (!restarted && u[2] <= 0.0) restarted = true;  // sigma collapsed
        if (restarted) {
            // One retry from a perturbed seed, then give up honestly.
            const std::array<double, 3> shaken = {seed[0] + 0.1, seed[1] + 0.2,
                                                  std::max(beta, 0.1)};
            try {
                u = attempt(shaken, &iters);
            } catch (const CalibrationError& e) {
                throw CalibrationError("calibrate_zbdt: step " + std::to_string(m) +
                                       " failed after restart: " + e.what());
            }
            if (u[2] <= 0.0)
                throw CalibrationError("calibrate_zbdt: step " + std::to_string(m) +
                                       " converged to non-positive sigma twice");
        }

        rows.push_back(ladder(u));
        prev = u;

        if (steps) {
            const auto res = residuals(u);
            StepSolution step;
            step.maturity = m;
            step.rates = rows.back();
            step.sigma = u[2];
            step.price_residual = res[0] * kFace;
            step.beta_residual = res[1];
            step.anchor_residual = res[2];
            step.iterations = iters;
            step.restarted = restarted;
            steps->push_back(std::move(step));
        }
    }

    ZbdtLattice lattice{std::move(rows), params};
    lattice.validate();
    return lattice;
}

CalibrationInput extract_market_view(const BdtLattice& lattice, std::string as_of) {
    lattice.validate();
    CalibrationInput input;
    input.as_of = std::move(as_of);
    input.window = 0;
    input.entries.push_back({1, lattice.rate(0, 1), 0.0});
    for (int m = 2; m <= lattice.periods(); ++m) {
        const SubYields s = bdt_sub_yields(lattice.rates, m);
        input.entries.push_back(
            {m, node_yield(s.root, m, 1.0), 0.5 * std::log(s.yu / s.yd)});
    }
    input.validate();
    return input;
}

CalibrationInput extract_market_view(const ZbdtLattice& lattice, BetaTarget target,
                                     std::string as_of) {
    lattice.validate();
    CalibrationInput input;
    input.as_of = std::move(as_of);
    input.window = 0;
    input.entries.push_back({1, lattice.rate(0, 1), 0.0});
    for (int m = 2; m <= lattice.periods(); ++m) {
        const SubYields s = zbdt_sub_yields(lattice.rates, lattice.params, m);
        const double v = ternary_variance(std::log(s.yu / s.y0), std::log(s.yd / s.y0),
                                          lattice.params.p);
        input.entries.push_back(
            {m, node_yield(s.root, m, 1.0), target == BetaTarget::variance ? std::sqrt(v) : v});
    }
    input.validate();
    return input;
}

}  // namespace ratelattice
