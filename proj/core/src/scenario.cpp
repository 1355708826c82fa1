#include "ratelattice/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ratelattice {

namespace {

const std::set<std::string> kKnownOutputs = {"rates", "bonds", "options", "market_view"};

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw Error("failed writing " + path.string());
}

bool wants(const ScenarioConfig& config, const std::string& kind) {
    return std::find(config.outputs.begin(), config.outputs.end(), kind) != config.outputs.end();
}

// CSV of a rate triangle, two-decimal percent: period,node,rate_pct.
// The ZIRP row (node 0) is included for the extended lattice from period 1 on.
std::string rates_csv(const std::vector<std::vector<double>>& rates, const ZbdtParams* zirp) {
    std::ostringstream out;
    out << "period,node,rate_pct\n";
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (zirp && i >= 1) out << i << ",0," << fixed(100.0 * zirp->x0, 2) << "\n";
        for (std::size_t j = 0; j < rates[i].size(); ++j)
            out << i << ',' << j + 1 << ',' << fixed(100.0 * rates[i][j], 2) << "\n";
    }
    return std::move(out).str();
}

// CSV of a bond price lattice, two decimals: period,node,price.
std::string bonds_csv(const PriceLattice& bond) {
    std::ostringstream out;
    out << "period,node,price\n";
    for (int i = 0; i <= bond.maturity; ++i) {
        if (bond.has_zirp && i >= 1) out << i << ",0," << fixed(bond.zirp(i), 2) << "\n";
        for (int j = 1; j <= i + 1; ++j) out << i << ',' << j << ',' << fixed(bond.at(i, j), 2) << "\n";
    }
    return std::move(out).str();
}

std::string options_csv(const std::vector<OptionRow>& rows) {
    std::ostringstream out;
    out << "strike,bdt_price,bdt_iv,zbdt_price,zbdt_iv\n";
    for (const auto& r : rows)
        out << fixed(r.strike, 2) << ',' << fixed(r.bdt_price, 4) << ',' << fixed(r.bdt_vol, 4)
            << ',' << fixed(r.zbdt_price, 4) << ',' << fixed(r.zbdt_vol, 4) << "\n";
    return std::move(out).str();
}

}  // namespace

void ScenarioConfig::validate() const {
    if (name.empty()) throw ConfigError("scenario: name must not be empty");
    for (const char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
            throw ConfigError("scenario '" + name + "': name must be filename-safe "
                              "(letters, digits, '_', '-')");
    const bool csv_mode = !as_of.empty();
    if (csv_mode == direct_input.has_value())
        throw ConfigError("scenario '" + name +
                          "': exactly one of as_of / direct_input must be given");
    if (csv_mode) {
        Date::parse(as_of);  // throws ParseError on malformed dates
        if (window < 2) throw ConfigError("scenario '" + name + "': window must be at least 2");
    } else {
        direct_input->validate();
    }
    zbdt.validate();
    if (!(options.strike_step > 0.0))
        throw ConfigError("scenario '" + name + "': strike_step must be positive");
    if (options.strike_hi < options.strike_lo)
        throw ConfigError("scenario '" + name + "': strike_hi must be >= strike_lo");
    if (options.expiry < 1 || options.bond_maturity <= options.expiry)
        throw ConfigError("scenario '" + name + "': need 1 <= expiry < bond_maturity");
    if (outputs.empty()) throw ConfigError("scenario '" + name + "': outputs must not be empty");
    for (const auto& o : outputs)
        if (!kKnownOutputs.count(o))
            throw ConfigError("scenario '" + name + "': unknown output kind '" + o + "'");
}

ScenarioConfig scenario_config_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario config JSON: ") + e.what());
    }

    ScenarioConfig config;
    try {
        config.name = j.at("name").get<std::string>();
        config.as_of = j.value("as_of", std::string{});
        if (j.contains("direct_input"))
            config.direct_input = calibration_input_from_json(j.at("direct_input").dump());
        config.window = j.value("window", 252);
        if (j.contains("normalization")) {
            const auto norm = j.at("normalization").get<std::string>();
            if (norm == "window_sum")
                config.normalization = VolNormalization::window_sum;
            else if (norm == "sample")
                config.normalization = VolNormalization::sample;
            else
                throw ConfigError("scenario config: unknown normalization '" + norm + "'");
        }
        if (j.contains("zbdt")) {
            const auto& z = j.at("zbdt");
            config.zbdt.p = z.value("p", config.zbdt.p);
            config.zbdt.q = z.value("q", config.zbdt.q);
            config.zbdt.x0 = z.value("x0", config.zbdt.x0);
        }
        if (j.contains("beta_target")) {
            const auto t = j.at("beta_target").get<std::string>();
            if (t == "variance")
                config.beta_target = BetaTarget::variance;
            else if (t == "level")
                config.beta_target = BetaTarget::level;
            else
                throw ConfigError("scenario config: unknown beta_target '" + t + "'");
        }
        if (j.contains("options")) {
            const auto& o = j.at("options");
            config.options.strike_lo = o.value("strike_lo", config.options.strike_lo);
            config.options.strike_hi = o.value("strike_hi", config.options.strike_hi);
            config.options.strike_step = o.value("strike_step", config.options.strike_step);
            config.options.expiry = o.value("expiry", config.options.expiry);
            config.options.bond_maturity = o.value("bond_maturity", config.options.bond_maturity);
        }
        if (j.contains("outputs")) config.outputs = j.at("outputs").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario config JSON: ") + e.what());
    }
    config.validate();
    return config;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_config_from_json(buf.str());
}

ScenarioResult run_scenario(const ScenarioConfig& config, const std::vector<YieldSeries>* data,
                            const SolverConfig& solver) {
    config.validate();

    ScenarioResult result;
    result.config = config;

    if (!config.as_of.empty()) {
        if (!data)
            throw ConfigError("scenario '" + config.name +
                              "' uses an as-of date and requires a yield data CSV");
        result.input = build_calibration_input(*data, Date::parse(config.as_of), config.window,
                                               config.normalization);
    } else {
        result.input = *config.direct_input;
    }

    const int maturity = config.options.bond_maturity;
    if (maturity > result.input.horizon())
        throw ConfigError("scenario '" + config.name + "': bond maturity " +
                          std::to_string(maturity) + " exceeds the market view horizon " +
                          std::to_string(result.input.horizon()));

    result.bdt = calibrate_bdt(result.input, solver, &result.bdt_steps);
    result.zbdt = calibrate_zbdt(result.input, config.zbdt, config.beta_target, solver,
                                 &result.zbdt_steps);

    result.bdt_bond = price_bond_bdt(result.bdt, maturity);
    result.zbdt_bond = price_bond_zbdt(result.zbdt, maturity);

    // Black-inversion discount factors: each lattice's own unit-face root
    // prices for the expiry and maturity dates. The strike enters in the
    // bond's dollar units while the discount factors stay on the unit scale,
    // matching the quoting convention of the reference tables; the call
    // price is normalized by the face accordingly.
    const int expiry = config.options.expiry;
    const double tau = expiry;
    const double bdt_bt = price_bond_bdt(result.bdt, maturity, 1.0).root();
    const double bdt_bs = price_bond_bdt(result.bdt, expiry, 1.0).root();
    const double zbdt_bt = price_bond_zbdt(result.zbdt, maturity, 1.0).root();
    const double zbdt_bs = price_bond_zbdt(result.zbdt, expiry, 1.0).root();

    for (double strike = config.options.strike_lo; strike <= config.options.strike_hi + 1e-9;
         strike += config.options.strike_step) {
        EuropeanCallSpec spec;
        spec.strike = strike;
        spec.expiry = expiry;
        spec.bond_maturity = maturity;

        OptionRow row;
        row.strike = strike;
        row.bdt_price = price_call_on_lattice(result.bdt, spec);
        row.zbdt_price = price_call_on_lattice(result.zbdt, spec);
        row.bdt_vol = implied_vol(row.bdt_price / spec.face, bdt_bt, bdt_bs, strike, tau);
        row.zbdt_vol = implied_vol(row.zbdt_price / spec.face, zbdt_bt, zbdt_bs, strike, tau);
        result.options.push_back(row);
    }
    return result;
}

std::string render_report(const ScenarioResult& result) {
    std::ostringstream out;
    const auto& config = result.config;
    out << "scenario: " << config.name << "\n";
    if (!result.input.as_of.empty()) out << "as of:    " << result.input.as_of << "\n";
    out << "zbdt:     p=" << config.zbdt.p << " q=" << config.zbdt.q << " x0=" << config.zbdt.x0
        << " beta_target="
        << (config.beta_target == BetaTarget::variance ? "variance" : "level") << "\n\n";

    out << "market view (yield %, beta):\n";
    for (const auto& e : result.input.entries) {
        out << "  k=" << e.maturity << "  y=" << fixed(100.0 * e.yield, 4);
        if (e.maturity >= 2) out << "  beta=" << fixed(e.beta, 6);
        out << "\n";
    }

    if (wants(config, "rates")) {
        out << "\none-period rates (%), binary lattice:\n" << render_rates(result.bdt);
        out << "\none-period rates (%), extended lattice:\n" << render_rates(result.zbdt);
    }
    if (wants(config, "bonds")) {
        out << "\n" << result.bdt_bond.maturity << "-period bond values, binary lattice:\n"
            << render_prices(result.bdt_bond);
        out << "\n" << result.zbdt_bond.maturity << "-period bond values, extended lattice:\n"
            << render_prices(result.zbdt_bond);
    }
    if (wants(config, "options")) {
        out << "\ncalls on the " << result.config.options.bond_maturity
            << "-period bond, expiry " << result.config.options.expiry << ":\n";
        out << "  strike  bdt_price  bdt_iv  zbdt_price  zbdt_iv\n";
        for (const auto& r : result.options)
            out << fixed(r.strike, 2) << "  " << fixed(r.bdt_price, 4) << "  "
                << fixed(r.bdt_vol, 4) << "  " << fixed(r.zbdt_price, 4) << "  "
                << fixed(r.zbdt_vol, 4) << "\n";
    }
    return std::move(out).str();
}

std::string render_trace(const ScenarioResult& result) {
    std::ostringstream out;
    const auto dump = [&](const char* label, const std::vector<StepSolution>& steps) {
        out << label << " calibration steps:\n";
        for (const auto& s : steps) {
            out << "  maturity " << s.maturity << ": sigma=" << fixed(s.sigma, 10)
                << " iterations=" << s.iterations << (s.restarted ? " (restarted)" : "") << "\n";
            out << "    rates:";
            for (const double r : s.rates) out << ' ' << fixed(100.0 * r, 6);
            out << "\n    residuals: price=" << s.price_residual << " beta=" << s.beta_residual
                << " anchor=" << s.anchor_residual << "\n";
        }
    };
    out.setf(std::ios::scientific, std::ios::floatfield);
    out.precision(3);
    dump("binary lattice", result.bdt_steps);
    dump("extended lattice", result.zbdt_steps);
    return std::move(out).str();
}

std::string report_json(const ScenarioResult& result) {
    nlohmann::json j;
    j["name"] = result.config.name;
    j["input"] = nlohmann::json::parse(to_json(result.input));
    j["bdt"] = nlohmann::json::parse(to_json(result.bdt));
    j["zbdt"] = nlohmann::json::parse(to_json(result.zbdt));

    if (wants(result.config, "bonds")) {
        nlohmann::json bonds;
        bonds["maturity"] = result.bdt_bond.maturity;
        bonds["face"] = result.bdt_bond.face;
        bonds["bdt"] = result.bdt_bond.values;
        bonds["zbdt"] = result.zbdt_bond.values;
        j["bonds"] = bonds;
    }
    if (wants(result.config, "options")) {
        j["options"] = nlohmann::json::array();
        for (const auto& r : result.options)
            j["options"].push_back({{"strike", r.strike},
                                    {"bdt_price", r.bdt_price},
                                    {"bdt_iv", r.bdt_vol},
                                    {"zbdt_price", r.zbdt_price},
                                    {"zbdt_iv", r.zbdt_vol}});
    }
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_output_files(const ScenarioResult& result,
                                                      const std::filesystem::path& out_dir) {
    const auto& config = result.config;

    // Render everything first; write files only when all tables succeeded.
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    const auto add = [&](const std::string& suffix, std::string content) {
        files.emplace_back(out_dir / (config.name + suffix), std::move(content));
    };

    if (wants(config, "rates")) {
        add("_rates_bdt.csv", rates_csv(result.bdt.rates, nullptr));
        add("_rates_zbdt.csv", rates_csv(result.zbdt.rates, &result.zbdt.params));
    }
    if (wants(config, "bonds")) {
        add("_bonds_bdt.csv", bonds_csv(result.bdt_bond));
        add("_bonds_zbdt.csv", bonds_csv(result.zbdt_bond));
    }
    if (wants(config, "options")) add("_options.csv", options_csv(result.options));
    if (wants(config, "market_view")) add("_market_view.json", to_json(result.input));

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& [path, content] : files) {
        write_file(path, content);
        written.push_back(path);
    }
    return written;
}

std::string emit_plot_series(const std::vector<YieldSeries>& series, int window,
                             VolNormalization norm) {
    std::ostringstream out;
    out << "date,tenor,yield,beta\n";
    char buf[64];
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.observations.size(); ++i) {
            const auto& obs = s.observations[i];
            std::snprintf(buf, sizeof(buf), "%.10g", obs.value);
            out << obs.date.to_string() << ',' << s.tenor << ',' << buf << ',';
            if (static_cast<int>(i) >= window) {
                std::snprintf(buf, sizeof(buf), "%.10g",
                              rolling_volatility(s, obs.date, window, norm));
                out << buf;
            }
            out << "\n";
        }
    }
    return std::move(out).str();
}

}  // namespace ratelattice
