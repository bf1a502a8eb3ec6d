#include "certeig/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "certeig/errors.hpp"

namespace certeig {

namespace {

using nlohmann::json;

void flatten(const json& j, std::vector<double>& out)
{
    if (j.is_array()) {
        for (const auto& e : j) {
            flatten(e, out);
        }
    } else if (j.is_number()) {
        out.push_back(j.get<double>());
    } else {
        throw Error(ErrorKind::ParseError, "table entries must be numbers");
    }
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::ParseError, "cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

double number(const json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw Error(ErrorKind::ParseError, std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

std::size_t count(const json& j, const char* key)
{
    const double v = number(j, key);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

// Material value at a cell, by the cell centre.
double material_value(const json& materials, double x)
{
    if (!materials.is_array() || materials.empty()) {
        throw Error(ErrorKind::ParseError, "per_material must be a nonempty array");
    }
    for (const auto& m : materials) {
        if (x <= number(m, "x_max")) {
            return number(m, "value");
        }
    }
    return number(materials.back(), "value");
}

// Expands one optics entry to a flat table with per_cell entries per cell.
std::vector<double> expand(const json& entry, const PhaseGrid& grid, std::size_t per_cell, const std::string& base_dir,
                           const char* what)
{
    const std::size_t total = grid.n_cells() * per_cell;
    if (!entry.is_object() || entry.size() != 1) {
        throw Error(ErrorKind::ParseError, std::string(what) + ": entry must be an object with one key");
    }
    if (entry.contains("constant")) {
        return std::vector<double>(total, number(entry, "constant"));
    }
    if (entry.contains("per_material")) {
        std::vector<double> out(total);
        for (std::size_t i = 0; i < grid.n_cells(); ++i) {
            const double v = material_value(entry.at("per_material"), grid.cell_center(i));
            std::fill(out.begin() + static_cast<long>(i * per_cell), out.begin() + static_cast<long>((i + 1) * per_cell), v);
        }
        return out;
    }
    if (entry.contains("separable")) {
        if (per_cell != grid.n_ordinates() * grid.n_ordinates()) {
            throw Error(ErrorKind::ParseError, std::string(what) + ": separable entries apply to kernels only");
        }
        const json& s = entry.at("separable");
        std::vector<double> in;
        std::vector<double> out_f;
        flatten(s.at("in"), in);
        flatten(s.at("out"), out_f);
        const double scale = s.contains("scale") ? number(s, "scale") : 1.0;
        const std::size_t n = grid.n_ordinates();
        if (in.size() != n || out_f.size() != n) {
            throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": separable factors need one entry per ordinate");
        }
        std::vector<double> out(total);
        for (std::size_t i = 0; i < grid.n_cells(); ++i) {
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) {
                    out[(i * n + a) * n + b] = scale * in[a] * out_f[b];
                }
            }
        }
        return out;
    }
    if (entry.contains("table") || entry.contains("values")) {
        json data = entry.contains("values") ? entry.at("values")
                                            : read_json_file((std::filesystem::path(base_dir) /
                                                              entry.at("table").get<std::string>())
                                                                 .string());
        std::vector<double> out;
        flatten(data, out);
        if (out.size() != total) {
            throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": table has " + std::to_string(out.size()) +
                                                      " entries, expected " + std::to_string(total));
        }
        return out;
    }
    throw Error(ErrorKind::ParseError, std::string(what) + ": unknown entry kind");
}

}  // namespace

Scenario parse_scenario(std::string_view json_text, const std::string& base_dir)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    if (!doc.is_object() || !doc.contains("grid") || !doc.contains("optics")) {
        throw Error(ErrorKind::ParseError, "scenario needs 'grid' and 'optics'");
    }
    try {
        const json& g = doc.at("grid");
        PhaseGrid grid = PhaseGrid::build(count(g, "n_cells"), number(g, "length"), count(g, "n_per_half"),
                                          number(g, "mu_min"));
        const json& o = doc.at("optics");
        const std::size_t n = grid.n_ordinates();
        OpticalField optics(grid, expand(o.at("sigma"), grid, n, base_dir, "sigma"),
                            expand(o.at("kappa"), grid, n * n, base_dir, "kappa"),
                            expand(o.at("phi"), grid, n * n, base_dir, "phi"));
        Scenario sc{doc.value("name", std::string("scenario")), std::move(grid), std::move(optics), {}, {}};
        if (doc.contains("newton")) {
            const json& nw = doc.at("newton");
            sc.newton.schedule = nw.value("schedule", sc.newton.schedule);
            sc.newton.zeta = nw.value("zeta", sc.newton.zeta);
            sc.newton.target = nw.value("target", sc.newton.target);
            sc.newton.backend = nw.value("backend", sc.newton.backend);
        }
        if (doc.contains("power")) {
            const json& pw = doc.at("power");
            sc.power.warmup = pw.value("warmup", sc.power.warmup);
            sc.power.c_pow = pw.value("c_pow", sc.power.c_pow);
            sc.power.max_steps = pw.value("max_steps", sc.power.max_steps);
        }
        return sc;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::ParseError, "cannot open scenario " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_scenario(ss.str(), dir.empty() ? std::string(".") : dir.string());
}

namespace {

constexpr const char* kConst = R"({
  "name": "SCEN-CONST",
  "grid": {"n_cells": 16, "length": 1.0, "n_per_half": 2, "mu_min": 0.1},
  "optics": {"sigma": {"constant": 2.0}, "kappa": {"constant": 0.5}, "phi": {"constant": 0.5}}
})";

constexpr const char* kHet = R"({
  "name": "SCEN-HET",
  "grid": {"n_cells": 16, "length": 1.0, "n_per_half": 2, "mu_min": 0.1},
  "optics": {
    "sigma": {"per_material": [{"x_max": 0.5, "value": 3.0}, {"x_max": 1.0, "value": 1.5}]},
    "kappa": {"per_material": [{"x_max": 0.5, "value": 1.0}, {"x_max": 1.0, "value": 0.4}]},
    "phi": {"constant": 0.8}
  }
})";

constexpr const char* kRef = R"({
  "name": "SCEN-REF",
  "grid": {"n_cells": 32, "length": 1.0, "n_per_half": 4, "mu_min": 0.05},
  "optics": {
    "sigma": {"per_material": [{"x_max": 0.5, "value": 3.0}, {"x_max": 1.0, "value": 1.5}]},
    "kappa": {"per_material": [{"x_max": 0.5, "value": 1.0}, {"x_max": 1.0, "value": 0.4}]},
    "phi": {"constant": 0.8}
  }
})";

}  // namespace

Scenario builtin_scenario(std::string_view name)
{
    if (name == "const") {
        return parse_scenario(kConst);
    }
    if (name == "het") {
        return parse_scenario(kHet);
    }
    if (name == "ref") {
        return parse_scenario(kRef);
    }
    throw Error(ErrorKind::ParseError, "unknown builtin scenario '" + std::string(name) + "'");
}

}  // namespace certeig
