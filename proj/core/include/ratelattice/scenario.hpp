#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratelattice/calibration.hpp"
#include "ratelattice/derivatives.hpp"
#include "ratelattice/market_data.hpp"

namespace ratelattice {

struct OptionGridSpec {
    double strike_lo = 80.0;
    double strike_hi = 99.0;
    double strike_step = 1.0;
    int expiry = 2;         // option expiry S
    int bond_maturity = 5;  // underlying bond maturity T
};

struct ScenarioConfig {
    std::string name;

    // Exactly one input mode: an as-of date resolved against a yield CSV, or
    // a fully specified market view.
    std::string as_of;  // empty unless CSV mode
    std::optional<CalibrationInput> direct_input;
    int window = 252;  // CSV-mode volatility window
    VolNormalization normalization = VolNormalization::window_sum;

    ZbdtParams zbdt{};
    BetaTarget beta_target = BetaTarget::variance;
    OptionGridSpec options{};

    // Any subset of {"rates", "bonds", "options", "market_view"}.
    std::vector<std::string> outputs{"rates", "bonds", "options", "market_view"};

    void validate() const;  // throws ConfigError
};

ScenarioConfig scenario_config_from_json(std::string_view text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

struct OptionRow {
    double strike = 0.0;
    double bdt_price = 0.0;
    double bdt_vol = 0.0;
    double zbdt_price = 0.0;
    double zbdt_vol = 0.0;
};

struct ScenarioResult {
    ScenarioConfig config;
    CalibrationInput input;
    BdtLattice bdt;
    ZbdtLattice zbdt;
    PriceLattice bdt_bond;   // the bond_maturity-period bond on each lattice
    PriceLattice zbdt_bond;
    std::vector<OptionRow> options;
    std::vector<StepSolution> bdt_steps;
    std::vector<StepSolution> zbdt_steps;
};

// Calibrate both lattices from the configured market view and price the
// option grid. `data` is required (and only used) in CSV mode.
ScenarioResult run_scenario(const ScenarioConfig& config,
                            const std::vector<YieldSeries>* data = nullptr,
                            const SolverConfig& solver = {});

enum class OutputFormat { table, csv, json };

// Human-readable report (--format table).
std::string render_report(const ScenarioResult& result);

// Per-step calibration diagnostics (--trace).
std::string render_trace(const ScenarioResult& result);

// Single machine-readable document, full precision (--format json).
std::string report_json(const ScenarioResult& result);

// File set for --format csv, honoring config.outputs:
//   <name>_rates_bdt.csv, <name>_rates_zbdt.csv, <name>_bonds_bdt.csv,
//   <name>_bonds_zbdt.csv, <name>_options.csv, <name>_market_view.json.
// Every table is rendered in memory before any file is opened, so a failure
// never leaves a partial table behind. Returns the written paths.
std::vector<std::filesystem::path> write_output_files(const ScenarioResult& result,
                                                      const std::filesystem::path& out_dir);

// Long-format plot data for ingested series: header date,tenor,yield,beta;
// one row per observation; beta stays blank until window+1 observations
// have accumulated for that tenor.
std::string emit_plot_series(const std::vector<YieldSeries>& series, int window = 252,
                             VolNormalization norm = VolNormalization::window_sum);

}  // namespace ratelattice
