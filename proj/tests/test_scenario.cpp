#include <doctest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures/scenario_tables.hpp"
#include "ratelattice/scenario.hpp"

using namespace ratelattice;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ScenarioConfig minimal_direct_config() {
    ScenarioConfig config;
    config.name = "unit";
    CalibrationInput input;
    input.entries = {{1, 0.0136, 0.0},
                     {2, 0.01996996935057327, 0.4463182704881311},
                     {3, 0.025971526654610333, 0.36485513838456257},
                     {4, 0.03067477358725723, 0.3065919880006071},
                     {5, 0.034178465655485546, 0.26499372618541384}};
    config.direct_input = input;
    // This market view was recovered from the reference tables, so pair it
    // with the settings that reproduce them; the default variance matching
    // has no solution for these betas at the later maturities.
    config.zbdt = ZbdtParams{fixtures::kTableP, fixtures::kTableQ, fixtures::kTableX0};
    config.beta_target = BetaTarget::level;
    return config;
}

}  // namespace

TEST_CASE("scenario_config_from_json: defaults and full form") {
    const ScenarioConfig defaults = scenario_config_from_json(R"({
        "name": "demo",
        "direct_input": {"as_of": "", "window": 0, "entries": [
            {"k": 1, "y": 0.02, "beta": 0.0},
            {"k": 2, "y": 0.025, "beta": 0.4},
            {"k": 3, "y": 0.028, "beta": 0.35},
            {"k": 4, "y": 0.030, "beta": 0.32},
            {"k": 5, "y": 0.031, "beta": 0.30}]}
    })");
    CHECK(defaults.name == "demo");
    CHECK(defaults.as_of.empty());
    REQUIRE(defaults.direct_input.has_value());
    CHECK(defaults.direct_input->horizon() == 5);
    CHECK(defaults.window == 252);
    CHECK(defaults.normalization == VolNormalization::window_sum);
    CHECK(defaults.zbdt.p == 0.02);
    CHECK(defaults.zbdt.q == 0.07);
    CHECK(defaults.zbdt.x0 == 0.0025);
    CHECK(defaults.beta_target == BetaTarget::variance);
    CHECK(defaults.options.strike_lo == 80.0);
    CHECK(defaults.options.strike_hi == 99.0);
    CHECK(defaults.options.strike_step == 1.0);
    CHECK(defaults.options.expiry == 2);
    CHECK(defaults.options.bond_maturity == 5);
    CHECK(defaults.outputs.size() == 4);

    const ScenarioConfig full = scenario_config_from_json(R"({
        "name": "full-demo",
        "as_of": "2025-02-24",
        "window": 100,
        "normalization": "sample",
        "zbdt": {"p": 0.005, "q": 0.10, "x0": 0.002},
        "beta_target": "level",
        "options": {"strike_lo": 85, "strike_hi": 95, "strike_step": 2.5,
                    "expiry": 1, "bond_maturity": 3},
        "outputs": ["rates", "options"],
        "notes": "unknown keys are tolerated"
    })");
    CHECK(full.as_of == "2025-02-24");
    CHECK_FALSE(full.direct_input.has_value());
    CHECK(full.window == 100);
    CHECK(full.normalization == VolNormalization::sample);
    CHECK(full.zbdt.p == 0.005);
    CHECK(full.beta_target == BetaTarget::level);
    CHECK(full.options.strike_step == 2.5);
    CHECK(full.outputs == std::vector<std::string>{"rates", "options"});
}

TEST_CASE("scenario config validation rejects inconsistent setups") {
    CHECK_THROWS_AS(scenario_config_from_json("{"), ParseError);
    CHECK_THROWS_AS(scenario_config_from_json(R"({"name": "x"})"), ConfigError);  // no input mode

    ScenarioConfig config = minimal_direct_config();
    CHECK_NOTHROW(config.validate());

    ScenarioConfig both = config;
    both.as_of = "2024-01-02";
    CHECK_THROWS_AS(both.validate(), ConfigError);

    ScenarioConfig bad_name = config;
    bad_name.name = "has/slash";
    CHECK_THROWS_AS(bad_name.validate(), ConfigError);
    bad_name.name = "";
    CHECK_THROWS_AS(bad_name.validate(), ConfigError);

    ScenarioConfig bad_step = config;
    bad_step.options.strike_step = 0.0;
    CHECK_THROWS_AS(bad_step.validate(), ConfigError);

    ScenarioConfig inverted = config;
    inverted.options.strike_lo = 99.0;
    inverted.options.strike_hi = 80.0;
    CHECK_THROWS_AS(inverted.validate(), ConfigError);

    ScenarioConfig bad_expiry = config;
    bad_expiry.options.expiry = 5;  // equals bond_maturity
    CHECK_THROWS_AS(bad_expiry.validate(), ConfigError);

    ScenarioConfig bad_output = config;
    bad_output.outputs = {"rates", "greeks"};
    CHECK_THROWS_AS(bad_output.validate(), ConfigError);

    ScenarioConfig no_output = config;
    no_output.outputs.clear();
    CHECK_THROWS_AS(no_output.validate(), ConfigError);

    CHECK_THROWS_AS(scenario_config_from_json(
                        R"({"name":"x","as_of":"2024-01-02","beta_target":"cubed"})"),
                    ConfigError);
    CHECK_THROWS_AS(scenario_config_from_json(
                        R"({"name":"x","as_of":"2024-01-02","normalization":"annualized"})"),
                    ConfigError);
}

TEST_CASE("checked-in scenario configs agree with the reference tables") {
    // The six scenario configs carry the market view extracted from the
    // published binary rate tables; loading one must reproduce that view.
    const ScenarioConfig config =
        load_scenario_config(fs::path(RATELATTICE_CONFIGS_DIR) / "scenario_I.json");
    CHECK(config.name == "scenario_I");
    CHECK(config.beta_target == BetaTarget::level);
    CHECK(config.zbdt.p == fixtures::kTableP);
    CHECK(config.zbdt.q == fixtures::kTableQ);
    CHECK(config.zbdt.x0 == fixtures::kTableX0);
    REQUIRE(config.direct_input.has_value());
    REQUIRE(config.direct_input->horizon() == 5);

    BdtLattice published;
    for (const auto& row : fixtures::scenario_tables()[0].bdt_rates) {
        std::vector<double> decimals;
        for (double pct : row) decimals.push_back(pct / 100.0);
        published.rates.push_back(std::move(decimals));
    }
    const CalibrationInput view = extract_market_view(published);
    for (int k = 1; k <= 5; ++k) {
        CHECK(config.direct_input->at(k).yield ==
              doctest::Approx(view.at(k).yield).epsilon(1e-9));
        if (k >= 2)
            CHECK(config.direct_input->at(k).beta ==
                  doctest::Approx(view.at(k).beta).epsilon(1e-9));
    }

    CHECK_THROWS_AS(load_scenario_config(fs::path(RATELATTICE_CONFIGS_DIR) / "nope.json"),
                    ConfigError);
}

TEST_CASE("run_scenario: direct-input end to end") {
    const ScenarioConfig config = minimal_direct_config();
    const ScenarioResult result = run_scenario(config);

    CHECK(result.input.horizon() == 5);
    CHECK(result.bdt.periods() == 5);
    CHECK(result.zbdt.periods() == 5);
    CHECK(result.bdt_steps.size() == 5);
    CHECK(result.zbdt_steps.size() == 5);

    // The root of the bond lattice restates the 5-period discount factor.
    const double y5 = config.direct_input->at(5).yield;
    CHECK(result.bdt_bond.root() ==
          doctest::Approx(100.0 / std::pow(1.0 + y5, 5)).epsilon(1e-10));
    CHECK(result.zbdt_bond.root() ==
          doctest::Approx(100.0 / std::pow(1.0 + y5, 5)).epsilon(1e-10));

    REQUIRE(result.options.size() == 20);
    for (std::size_t i = 0; i < result.options.size(); ++i) {
        const auto& row = result.options[i];
        CHECK(row.strike == 80.0 + static_cast<double>(i));
        CHECK(row.bdt_price >= 0.0);
        CHECK(row.zbdt_price >= 0.0);
        if (row.bdt_price == 0.0) CHECK(row.bdt_vol == 0.0);
        if (row.zbdt_price == 0.0) CHECK(row.zbdt_vol == 0.0);
        if (i > 0) {  // call prices fall as the strike rises
            CHECK(row.bdt_price <= result.options[i - 1].bdt_price + 1e-12);
            CHECK(row.zbdt_price <= result.options[i - 1].zbdt_price + 1e-12);
        }
    }

    // A bond maturity beyond the market view cannot be priced.
    ScenarioConfig too_long = config;
    too_long.options.bond_maturity = 6;
    too_long.options.expiry = 2;
    CHECK_THROWS_AS(run_scenario(too_long), ConfigError);

    // CSV-mode configs require data.
    ScenarioConfig csv_mode = config;
    csv_mode.direct_input.reset();
    csv_mode.as_of = "2024-01-02";
    CHECK_THROWS_AS(run_scenario(csv_mode), ConfigError);
}

TEST_CASE("run_scenario: CSV mode builds the market view from series") {
    std::ostringstream csv;
    csv << "date,1Y,2Y,3Y,4Y,5Y\n";
    const int days = 15;
    for (int t = 0; t < days; ++t) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "2024-03-%02d", t + 10);
        csv << buf;
        for (int k = 1; k <= 5; ++k) {
            const double base = 0.015 + 0.003 * k;
            // Amplitude 0.05 keeps the window-10 betas near 0.19, where the
            // extended calibration stays well inside its admissible region
            // (the lowest binary rate never approaches the crisis rate).
            const double y = base * std::exp(0.05 * std::sin(2.1 * t + k));
            std::snprintf(buf, sizeof(buf), ",%.6f", 100.0 * y);
            csv << buf;
        }
        csv << '\n';
    }
    const auto series = parse_yield_csv(csv.str(), YieldUnit::percent);

    ScenarioConfig config;
    config.name = "csv_unit";
    config.as_of = "2024-03-24";
    config.window = 10;
    config.zbdt = ZbdtParams{0.005, 0.10, 0.002};
    config.beta_target = BetaTarget::level;
    config.options = OptionGridSpec{85.0, 95.0, 5.0, 2, 5};
    const ScenarioResult result = run_scenario(config, &series);

    CHECK(result.input.as_of == "2024-03-24");
    CHECK(result.input.window == 10);
    REQUIRE(result.input.horizon() == 5);
    for (int k = 2; k <= 5; ++k) CHECK(result.input.at(k).beta > 0.0);
    CHECK(result.options.size() == 3);  // strikes 85, 90, 95
    CHECK(result.bdt.periods() == 5);
}

TEST_CASE("report rendering and the JSON document") {
    const ScenarioResult result = run_scenario(minimal_direct_config());

    const std::string report = render_report(result);
    CHECK(report.find("scenario: unit") != std::string::npos);
    CHECK(report.find("market view") != std::string::npos);
    CHECK(report.find("binary lattice") != std::string::npos);
    CHECK(report.find("zirp") != std::string::npos);
    CHECK(report.find("strike") != std::string::npos);

    const std::string trace = render_trace(result);
    CHECK(trace.find("sigma") != std::string::npos);
    CHECK(trace.find("residual") != std::string::npos);

    const auto doc = nlohmann::json::parse(report_json(result));
    CHECK(doc.at("name") == "unit");
    CHECK(doc.at("input").at("entries").size() == 5);
    CHECK(doc.at("bdt").at("periods") == 5);
    CHECK(doc.at("zbdt").at("zirp").at("p") == fixtures::kTableP);
    CHECK(doc.at("options").size() == 20);
    CHECK(doc.at("bonds").at("maturity") == 5);
    // Full-precision round trip of a calibrated rate through the document.
    const double r = doc.at("bdt").at("rates")[4][2].get<double>();
    CHECK(r == result.bdt.rate(4, 3));
}

TEST_CASE("write_output_files is deterministic and honors the output list") {
    ScenarioConfig config = minimal_direct_config();
    config.name = "filetest";
    const ScenarioResult result = run_scenario(config);

    const fs::path dir = fs::temp_directory_path() / "ratelattice_test_out";
    fs::remove_all(dir);
    const auto paths = write_output_files(result, dir);
    REQUIRE(paths.size() == 6);
    for (const auto& p : paths) CHECK(fs::exists(p));

    // Re-running produces byte-identical files.
    std::vector<std::string> first;
    for (const auto& p : paths) first.push_back(slurp(p));
    const auto again = write_output_files(result, dir);
    REQUIRE(again == paths);
    for (std::size_t i = 0; i < paths.size(); ++i) CHECK(slurp(paths[i]) == first[i]);

    // The options CSV has a header plus one row per strike.
    const fs::path options_csv = dir / "filetest_options.csv";
    REQUIRE(fs::exists(options_csv));
    const std::string text = slurp(options_csv);
    CHECK(std::count(text.begin(), text.end(), '\n') == 21);
    CHECK(text.rfind("strike,bdt_price,bdt_iv,zbdt_price,zbdt_iv", 0) == 0);

    // Restricting outputs restricts the file set.
    ScenarioConfig rates_only = config;
    rates_only.name = "ratesonly";
    rates_only.outputs = {"rates"};
    const auto few = write_output_files(run_scenario(rates_only), dir);
    CHECK(few.size() == 2);
    for (const auto& p : few) CHECK(p.filename().string().rfind("ratesonly_rates_", 0) == 0);

    fs::remove_all(dir);
}

TEST_CASE("emit_plot_series leaves beta blank until the window fills") {
    YieldSeries s;
    s.tenor = "2Y";
    const double v[] = {0.02, 0.021, 0.0205, 0.022, 0.0215, 0.023};
    for (int i = 0; i < 6; ++i) s.observations.push_back({Date{2024, 1, i + 1}, v[i]});
    const std::vector<YieldSeries> all = {s};

    const std::string text = emit_plot_series(all, 3);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "date,tenor,yield,beta");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 6);
    // Indices 0..2 (fewer than window+1 observations so far): blank beta.
    for (int i = 0; i < 3; ++i) CHECK(rows[static_cast<std::size_t>(i)].back() == ',');
    // From index 3 on the rolling volatility is quoted.
    for (int i = 3; i < 6; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        const auto last_comma = row.rfind(',');
        const double beta = std::stod(row.substr(last_comma + 1));
        CHECK(beta ==
              doctest::Approx(rolling_volatility(s, s.observations[static_cast<std::size_t>(i)].date, 3))
                  .epsilon(1e-8));
    }
}
