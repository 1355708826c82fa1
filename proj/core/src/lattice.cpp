#include "ratelattice/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace ratelattice {

namespace {

void validate_triangle(const std::vector<std::vector<double>>& rates, const char* what) {
    if (rates.empty()) throw ValidationError(std::string(what) + ": no periods");
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const std::string tag = std::string(what) + " period " + std::to_string(i);
        if (rates[i].size() != i + 1)
            throw ValidationError(tag + ": expected " + std::to_string(i + 1) + " rates, got " +
                                  std::to_string(rates[i].size()));
        for (std::size_t j = 0; j < rates[i].size(); ++j) {
            const double r = rates[i][j];
            if (!std::isfinite(r) || r <= 0.0)
                throw ValidationError(tag + ": rate at node " + std::to_string(j + 1) +
                                      " must be positive and finite");
            if (j > 0 && r <= rates[i][j - 1])
                throw ValidationError(tag + ": rates must increase strictly with the node index");
        }
    }
}

double checked_rate(const std::vector<std::vector<double>>& rates, int i, int j, const char* what) {
    if (i < 0 || i >= static_cast<int>(rates.size()) || j < 1 ||
        j > static_cast<int>(rates[static_cast<std::size_t>(i)].size()))
        throw ValidationError(std::string(what) + ": no node (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    return rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
}

std::vector<std::vector<double>> triangle_from_json(const nlohmann::json& j, const char* what) {
    std::vector<std::vector<double>> rates;
    for (const auto& row : j.at("rates")) rates.push_back(row.get<std::vector<double>>());
    if (j.contains("periods") && j.at("periods").get<int>() != static_cast<int>(rates.size()))
        throw ParseError(std::string(what) + " JSON: 'periods' does not match the rates array");
    return rates;
}

std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%8.2f", v);
    return buf;
}

}  // namespace

double BdtLattice::rate(int i, int j) const { return checked_rate(rates, i, j, "BdtLattice"); }

void BdtLattice::validate() const { validate_triangle(rates, "BdtLattice"); }

void ZbdtParams::validate() const {
    if (!(p >= 0.0 && p < 1.0)) throw ValidationError("ZbdtParams: p must lie in [0, 1)");
    if (!(q > 0.0 && q <= 1.0)) throw ValidationError("ZbdtParams: q must lie in (0, 1]");
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw ValidationError("ZbdtParams: x0 must be positive");
}

double ZbdtLattice::rate(int i, int j) const { return checked_rate(rates, i, j, "ZbdtLattice"); }

void ZbdtLattice::validate() const {
    params.validate();
    validate_triangle(rates, "ZbdtLattice");
    for (std::size_t i = 0; i < rates.size(); ++i)
        if (rates[i][0] <= params.x0)
            throw ValidationError("ZbdtLattice period " + std::to_string(i) +
                                  ": lowest regular rate must exceed the ZIRP rate x0");
}

double PriceLattice::root() const {
    if (values.empty() || values[0].empty()) throw ValidationError("PriceLattice: empty");
    return values[0][0];
}

double PriceLattice::at(int i, int j) const {
    if (i < 0 || i > maturity || j < 1 || j > i + 1)
        throw ValidationError("PriceLattice: no regular node (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    const auto& row = values[static_cast<std::size_t>(i)];
    if (!has_zirp || i == 0) return row[static_cast<std::size_t>(j - 1)];
    return row[static_cast<std::size_t>(j)];
}

double PriceLattice::zirp(int i) const {
    if (!has_zirp) throw ValidationError("PriceLattice: lattice has no ZIRP state");
    if (i < 1 || i > maturity)
        throw ValidationError("PriceLattice: no ZIRP node at period " + std::to_string(i));
    return values[static_cast<std::size_t>(i)][0];
}

PriceLattice price_bond_bdt(const BdtLattice& lattice, int maturity, double face) {
    if (maturity < 1 || maturity > lattice.periods())
        throw ValidationError("price_bond_bdt: maturity " + std::to_string(maturity) +
                              " outside 1.." + std::to_string(lattice.periods()));
    if (!(face > 0.0)) throw ValidationError("price_bond_bdt: face must be positive");

    PriceLattice out;
    out.maturity = maturity;
    out.face = face;
    out.has_zirp = false;
    out.values.assign(static_cast<std::size_t>(maturity) + 1, {});
    out.values[static_cast<std::size_t>(maturity)].assign(static_cast<std::size_t>(maturity) + 1, face);

    for (int i = maturity - 1; i >= 0; --i) {
        const auto& next = out.values[static_cast<std::size_t>(i + 1)];
        std::vector<double> cur(static_cast<std::size_t>(i) + 1);
        for (int j = 0; j <= i; ++j)
            cur[static_cast<std::size_t>(j)] =
                0.5 * (next[static_cast<std::size_t>(j)] + next[static_cast<std::size_t>(j + 1)]) /
                (1.0 + lattice.rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        out.values[static_cast<std::size_t>(i)] = std::move(cur);
    }
    return out;
}

PriceLattice price_bond_zbdt(const ZbdtLattice& lattice, int maturity, double face) {
    if (maturity < 1 || maturity > lattice.periods())
        throw ValidationError("price_bond_zbdt: maturity " + std::to_string(maturity) +
                              " outside 1.." + std::to_string(lattice.periods()));
    if (!(face > 0.0)) throw ValidationError("price_bond_zbdt: face must be positive");

    const double p = lattice.params.p;
    const double q = lattice.params.q;
    const double x0 = lattice.params.x0;
    const double ph = lattice.params.regular_weight();

    PriceLattice out;
    out.maturity = maturity;
    out.face = face;
    out.has_zirp = true;
    out.values.assign(static_cast<std::size_t>(maturity) + 1, {});
    out.values[static_cast<std::size_t>(maturity)].assign(static_cast<std::size_t>(maturity) + 2, face);

    std::vector<double> next = out.values[static_cast<std::size_t>(maturity)];
    for (int i = maturity - 1; i >= 0; --i) {
        std::vector<double> cur(static_cast<std::size_t>(i) + 2);
        // ZIRP node: stay at x0 with weight 1-q, re-enter the lowest regular
        // node with weight q.
        cur[0] = (q * next[1] + (1.0 - q) * next[0]) / (1.0 + x0);
        // Lowest regular node: ternary (up, mid, crisis) branching.
        cur[1] = (ph * next[2] + ph * next[1] + p * next[0]) /
                 (1.0 + lattice.rates[static_cast<std::size_t>(i)][0]);
        for (int j = 2; j <= i + 1; ++j)
            cur[static_cast<std::size_t>(j)] =
                0.5 * (next[static_cast<std::size_t>(j + 1)] + next[static_cast<std::size_t>(j)]) /
                (1.0 + lattice.rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)]);
        if (i == 0)
            out.values[0] = {cur[1]};  // only the root exists at time 0
        else
            out.values[static_cast<std::size_t>(i)] = cur;
        next = std::move(cur);
    }
    return out;
}

double node_yield(double price, int periods_to_maturity, double face) {
    if (!(price > 0.0) || !(face > 0.0))
        throw ValidationError("node_yield: price and face must be positive");
    if (periods_to_maturity < 1)
        throw ValidationError("node_yield: periods_to_maturity must be at least 1");
    return std::pow(face / price, 1.0 / periods_to_maturity) - 1.0;
}

std::string to_json(const BdtLattice& lattice) {
    nlohmann::json j;
    j["periods"] = lattice.periods();
    j["rates"] = lattice.rates;
    return j.dump(2) + "\n";
}

std::string to_json(const ZbdtLattice& lattice) {
    nlohmann::json j;
    j["periods"] = lattice.periods();
    j["rates"] = lattice.rates;
    j["zirp"] = {{"p", lattice.params.p}, {"q", lattice.params.q}, {"x0", lattice.params.x0}};
    return j.dump(2) + "\n";
}

BdtLattice bdt_lattice_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        BdtLattice lattice{triangle_from_json(j, "BdtLattice")};
        lattice.validate();
        return lattice;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("BdtLattice JSON: ") + e.what());
    }
}

ZbdtLattice zbdt_lattice_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        ZbdtLattice lattice;
        lattice.rates = triangle_from_json(j, "ZbdtLattice");
        const auto& z = j.at("zirp");
        lattice.params.p = z.at("p").get<double>();
        lattice.params.q = z.at("q").get<double>();
        lattice.params.x0 = z.at("x0").get<double>();
        lattice.validate();
        return lattice;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("ZbdtLattice JSON: ") + e.what());
    }
}

namespace {

std::string render_triangle(const std::vector<std::vector<double>>& cells, double scale,
                            const std::vector<double>* zirp_row) {
    const int columns = static_cast<int>(cells.size());
    int max_j = 0;
    for (const auto& row : cells) max_j = std::max(max_j, static_cast<int>(row.size()));

    std::ostringstream out;
    for (int j = max_j; j >= 1; --j) {
        char label[16];
        std::snprintf(label, sizeof(label), "  j=%-3d", j);
        out << label;
        for (int i = 0; i < columns; ++i) {
            const auto& row = cells[static_cast<std::size_t>(i)];
            if (j <= static_cast<int>(row.size()))
                out << format_cell(scale * row[static_cast<std::size_t>(j - 1)]);
            else
                out << std::string(8, ' ');
        }
        out << '\n';
    }
    if (zirp_row) {
        out << "  zirp ";
        for (int i = 0; i < columns; ++i) {
            const double v = (*zirp_row)[static_cast<std::size_t>(i)];
            out << (v < 0.0 ? std::string(8, ' ') : format_cell(v));
        }
        out << '\n';
    }
    return std::move(out).str();
}

}  // namespace

std::string render_rates(const BdtLattice& lattice) {
    return render_triangle(lattice.rates, 100.0, nullptr);
}

std::string render_rates(const ZbdtLattice& lattice) {
    // The ZIRP state exists from period 1 onward.
    std::vector<double> zirp_row(static_cast<std::size_t>(lattice.periods()), 100.0 * lattice.params.x0);
    if (!zirp_row.empty()) zirp_row[0] = -1.0;
    return render_triangle(lattice.rates, 100.0, &zirp_row);
}

std::string render_prices(const PriceLattice& prices) {
    std::vector<std::vector<double>> cells(static_cast<std::size_t>(prices.maturity) + 1);
    for (int i = 0; i <= prices.maturity; ++i) {
        auto& row = cells[static_cast<std::size_t>(i)];
        row.resize(static_cast<std::size_t>(i) + 1);
        for (int j = 1; j <= i + 1; ++j) row[static_cast<std::size_t>(j - 1)] = prices.at(i, j);
    }
    if (!prices.has_zirp) return render_triangle(cells, 1.0, nullptr);

    std::vector<double> zirp_row(static_cast<std::size_t>(prices.maturity) + 1, -1.0);
    for (int i = 1; i <= prices.maturity; ++i) zirp_row[static_cast<std::size_t>(i)] = prices.zirp(i);
    return render_triangle(cells, 1.0, &zirp_row);
}

}  // namespace ratelattice
