// Command-line front end: calibrate the binary and extended short-rate
// lattices for a configured scenario, price the bond-option grid, and emit
// the tables as text, CSV files, or JSON. A `plot` subcommand turns a daily
// yield CSV into long-format plot data with rolling volatilities.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ratelattice/scenario.hpp"

namespace {

ratelattice::YieldUnit parse_unit(const std::string& name) {
    return name == "decimal" ? ratelattice::YieldUnit::decimal : ratelattice::YieldUnit::percent;
}

std::vector<ratelattice::YieldSeries> load_data(const std::string& path,
                                                ratelattice::YieldUnit unit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ratelattice::ConfigError("cannot open data CSV " + path);
    return ratelattice::parse_yield_csv(in, unit);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Short-rate lattice calibration and zero-coupon bond option pricing"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string data_path;
    std::string out_dir = ".";
    std::string format = "table";
    std::string yields_in = "percent";
    double p = 0.0, q = 0.0, x0 = 0.0, tol = 0.0;
    int max_iter = 0;
    bool trace = false;

    auto* config_opt = app.add_option("--config", config_path, "Scenario config (JSON)");
    app.add_option("--data", data_path, "Daily yield CSV (required by as-of configs)");
    app.add_option("--out", out_dir, "Output directory for --format csv")->capture_default_str();
    app.add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    auto* p_opt = app.add_option("--p", p, "Override the crisis-branch probability p");
    auto* q_opt = app.add_option("--q", q, "Override the ZIRP-exit probability q");
    auto* x0_opt = app.add_option("--x0", x0, "Override the ZIRP rate x0 (decimal)");
    auto* tol_opt = app.add_option("--tol", tol, "Solver residual tolerance");
    auto* iter_opt = app.add_option("--max-iter", max_iter, "Solver iteration budget");
    app.add_flag("--trace", trace, "Print per-step calibration diagnostics to stderr");
    app.add_option("--yields-in", yields_in, "Unit of the data CSV yields")
        ->check(CLI::IsMember({"percent", "decimal"}))
        ->capture_default_str();

    auto* plot = app.add_subcommand("plot", "Emit long-format plot data from a yield CSV");
    std::string plot_data;
    int plot_window = 252;
    plot->add_option("--data", plot_data, "Daily yield CSV")->required();
    plot->add_option("--window", plot_window, "Rolling volatility window")->capture_default_str();
    std::string plot_yields_in = "percent";
    plot->add_option("--yields-in", plot_yields_in, "Unit of the data CSV yields")
        ->check(CLI::IsMember({"percent", "decimal"}))
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (plot->parsed()) {
            const auto series = load_data(plot_data, parse_unit(plot_yields_in));
            std::cout << ratelattice::emit_plot_series(series, plot_window);
            return 0;
        }

        if (config_opt->count() == 0) {
            std::cerr << "error: --config is required (or use the plot subcommand)\n";
            return 1;
        }

        auto config = ratelattice::load_scenario_config(config_path);
        if (p_opt->count() > 0) config.zbdt.p = p;
        if (q_opt->count() > 0) config.zbdt.q = q;
        if (x0_opt->count() > 0) config.zbdt.x0 = x0;

        ratelattice::SolverConfig solver;
        if (tol_opt->count() > 0) solver.abs_tol = tol;
        if (iter_opt->count() > 0) solver.max_iter = max_iter;

        std::optional<std::vector<ratelattice::YieldSeries>> data;
        if (!data_path.empty()) data = load_data(data_path, parse_unit(yields_in));

        const auto result =
            ratelattice::run_scenario(config, data ? &*data : nullptr, solver);

        if (trace) std::cerr << ratelattice::render_trace(result);

        if (format == "table") {
            std::cout << ratelattice::render_report(result);
        } else if (format == "json") {
            std::cout << ratelattice::report_json(result);
        } else {
            for (const auto& path : ratelattice::write_output_files(result, out_dir))
                std::cout << "wrote " << path.string() << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
