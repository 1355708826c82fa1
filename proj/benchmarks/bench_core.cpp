// Micro-benchmarks for the hot paths: lattice calibration, bond pricing,
// the option grid (pricing plus implied-volatility inversion), and the
// rolling yield volatility over a long daily series.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ratelattice/calibration.hpp"
#include "ratelattice/derivatives.hpp"
#include "ratelattice/lattice.hpp"
#include "ratelattice/market_data.hpp"

using namespace ratelattice;

namespace {

// A five-year market view on the scale of the historical scenarios.
CalibrationInput demo_input() {
    CalibrationInput input;
    input.entries = {{1, 0.0136, 0.0},
                     {2, 0.01996996935057327, 0.4463182704881311},
                     {3, 0.025971526654610333, 0.36485513838456257},
                     {4, 0.03067477358725723, 0.3065919880006071},
                     {5, 0.034178465655485546, 0.26499372618541384}};
    return input;
}

ZbdtParams reproduction_params() { return {0.002, 0.05, 0.0025}; }

void bm_calibrate_bdt(benchmark::State& state) {
    const CalibrationInput input = demo_input();
    for (auto _ : state) benchmark::DoNotOptimize(calibrate_bdt(input));
}
BENCHMARK(bm_calibrate_bdt);

void bm_calibrate_zbdt(benchmark::State& state) {
    const CalibrationInput input = demo_input();
    const ZbdtParams params = reproduction_params();
    for (auto _ : state)
        benchmark::DoNotOptimize(calibrate_zbdt(input, params, BetaTarget::level));
}
BENCHMARK(bm_calibrate_zbdt);

void bm_price_bond_bdt(benchmark::State& state) {
    const BdtLattice lattice = calibrate_bdt(demo_input());
    for (auto _ : state) benchmark::DoNotOptimize(price_bond_bdt(lattice, 5));
}
BENCHMARK(bm_price_bond_bdt);

void bm_price_bond_zbdt(benchmark::State& state) {
    const ZbdtLattice lattice =
        calibrate_zbdt(demo_input(), reproduction_params(), BetaTarget::level);
    for (auto _ : state) benchmark::DoNotOptimize(price_bond_zbdt(lattice, 5));
}
BENCHMARK(bm_price_bond_zbdt);

// The full 20-strike grid: forty lattice valuations and forty bisections.
void bm_option_grid(benchmark::State& state) {
    const CalibrationInput input = demo_input();
    const BdtLattice bdt = calibrate_bdt(input);
    const ZbdtLattice zbdt = calibrate_zbdt(input, reproduction_params(), BetaTarget::level);
    const double bt_b = price_bond_bdt(bdt, 5, 1.0).root();
    const double bs_b = price_bond_bdt(bdt, 2, 1.0).root();
    const double bt_z = price_bond_zbdt(zbdt, 5, 1.0).root();
    const double bs_z = price_bond_zbdt(zbdt, 2, 1.0).root();

    for (auto _ : state) {
        double sink = 0.0;
        for (int strike = 80; strike <= 99; ++strike) {
            const EuropeanCallSpec spec{static_cast<double>(strike), 2, 5, 100.0};
            const double cb = price_call_on_lattice(bdt, spec);
            const double cz = price_call_on_lattice(zbdt, spec);
            sink += implied_vol(cb / 100.0, bt_b, bs_b, spec.strike, 2.0);
            sink += implied_vol(cz / 100.0, bt_z, bs_z, spec.strike, 2.0);
        }
        benchmark::DoNotOptimize(sink);
    }
}
BENCHMARK(bm_option_grid);

void bm_rolling_volatility(benchmark::State& state) {
    std::mt19937_64 gen(12);
    std::normal_distribution<double> shock(0.0, 0.01);
    YieldSeries series;
    series.tenor = "5Y";
    double y = 0.03;
    Date d{2015, 1, 1};
    for (int t = 0; t < 2000; ++t) {
        series.observations.push_back({d, y});
        y *= std::exp(shock(gen));
        // Calendar realism is irrelevant here; distinct ascending dates are
        // all the series contract requires.
        if (++d.day > 28) {
            d.day = 1;
            if (++d.month > 12) {
                d.month = 1;
                ++d.year;
            }
        }
    }
    const Date last = series.observations.back().date;
    for (auto _ : state) benchmark::DoNotOptimize(rolling_volatility(series, last, 252));
}
BENCHMARK(bm_rolling_volatility);

}  // namespace

BENCHMARK_MAIN();
