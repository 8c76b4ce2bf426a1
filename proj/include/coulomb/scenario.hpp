#pragma once

// Scenario files: JSON documents describing a formation, a relative force
// command, an ε search set, and optionally a reconfiguration maneuver.
//
//   {
//     "formation":   {"dimension": 2, "positions": [[0, 0], [10, 0], ...]},
//     "command":     {"relative_force": [...]},                      (optional)
//     "epsilon_set": {"mode": "linear", "count": 30}                 (optional)
//                  | {"mode": "explicit", "values": [0.05, 0.1]},
//     "maneuver":    {"masses": [...], "kappa": 0.05, "rho": 0.2,    (optional)
//                     "xi_des": [[...]], "xi0": [[...]], "v0": [[...]],
//                     "dt": 0.1, "t_final": 60}
//   }

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "allocator.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "linalg.hpp"
#include "sim.hpp"

namespace coulomb {

struct ManeuverSpec {
    Vector masses;
    double kappa = 0.0;
    double rho = 0.0;
    std::vector<Vector> xi_des;
    std::vector<Vector> xi0;
    std::vector<Vector> v0;
    double dt = 0.1;
    double t_final = 60.0;

    bool operator==(const ManeuverSpec&) const = default;
};

struct Scenario {
    std::size_t dimension = 0;
    std::vector<Vector> positions;
    std::optional<Vector> command;
    EpsilonSpec epsilon;
    std::optional<ManeuverSpec> maneuver;

    bool operator==(const Scenario&) const = default;

    FormationState formation() const { return FormationState(dimension, positions); }

    RelativeForce relative_force() const {
        if (!command) throw Error(ErrorCode::invalid_input, "scenario has no `command` section");
        return {*command};
    }

    ManeuverConfig maneuver_config(const SolverSettings& solver = {}) const {
        if (!maneuver) throw Error(ErrorCode::invalid_input, "scenario has no `maneuver` section");
        ManeuverConfig cfg;
        cfg.dim = dimension;
        cfg.masses = maneuver->masses;
        cfg.kappa = maneuver->kappa;
        cfg.rho = maneuver->rho;
        cfg.xi_des = maneuver->xi_des;
        cfg.x0 = positions_from_relative(maneuver->xi0, dimension);
        cfg.v0 = maneuver->v0;
        cfg.dt = maneuver->dt;
        cfg.t_final = maneuver->t_final;
        cfg.epsilon = epsilon;
        cfg.solver = solver;
        cfg.validate();
        return cfg;
    }
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void scenario_error(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::invalid_input, "field `" + field + "`: " + what);
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) scenario_error(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) scenario_error(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) scenario_error(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) scenario_error(path, "must be finite");
    return v;
}

inline Vector number_list(const json& j, const std::string& path) {
    if (!j.is_array()) scenario_error(path, "expected an array of numbers");
    Vector v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

inline std::vector<Vector> vector_list(const json& j, const std::string& path, std::size_t dim) {
    if (!j.is_array()) scenario_error(path, "expected an array of vectors");
    std::vector<Vector> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        Vector v = number_list(j[i], p);
        if (v.size() != dim)
            scenario_error(p, "expected " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
        out.push_back(std::move(v));
    }
    return out;
}

inline json vectors_to_json(const std::vector<Vector>& vs) {
    json a = json::array();
    for (const auto& v : vs) a.push_back(v);
    return a;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& doc) {
    using detail::require;
    using detail::scenario_error;
    if (!doc.is_object()) scenario_error("<root>", "expected a JSON object");

    Scenario s;
    const auto& formation = require(doc, "formation", "");
    const auto& dim_json = require(formation, "dimension", "formation");
    if (!dim_json.is_number_integer()) scenario_error("formation.dimension", "expected an integer");
    const auto dim = dim_json.get<long long>();
    if (dim != 2 && dim != 3) scenario_error("formation.dimension", "must be 2 or 3");
    s.dimension = static_cast<std::size_t>(dim);
    s.positions = detail::vector_list(require(formation, "positions", "formation"), "formation.positions", s.dimension);
    if (s.positions.size() < 2) scenario_error("formation.positions", "needs at least two spacecraft");
    const std::size_t n = s.positions.size();

    if (doc.contains("command")) {
        Vector f = detail::number_list(require(doc["command"], "relative_force", "command"), "command.relative_force");
        if (f.size() != s.dimension * (n - 1))
            scenario_error("command.relative_force", "expected dimension·(N−1) = " +
                                                         std::to_string(s.dimension * (n - 1)) + " components");
        s.command = std::move(f);
    }

    if (doc.contains("epsilon_set")) {
        const auto& e = doc["epsilon_set"];
        if (!e.is_object()) scenario_error("epsilon_set", "expected an object");
        const std::string mode = e.value("mode", std::string("linear"));
        if (mode == "linear") {
            s.epsilon.mode = EpsilonSpec::Mode::linear;
            if (e.contains("count")) {
                if (!e["count"].is_number_integer() || e["count"].get<long long>() < 1)
                    scenario_error("epsilon_set.count", "expected a positive integer");
                s.epsilon.count = e["count"].get<int>();
            }
            if (e.contains("lo_fraction")) s.epsilon.lo_fraction = detail::number(e["lo_fraction"], "epsilon_set.lo_fraction");
            if (e.contains("hi_fraction")) s.epsilon.hi_fraction = detail::number(e["hi_fraction"], "epsilon_set.hi_fraction");
            if (!(0.0 <= s.epsilon.lo_fraction && s.epsilon.lo_fraction <= s.epsilon.hi_fraction &&
                  s.epsilon.hi_fraction < 1.0))
                scenario_error("epsilon_set", "fractions must satisfy 0 ≤ lo_fraction ≤ hi_fraction < 1");
        } else if (mode == "explicit") {
            s.epsilon.mode = EpsilonSpec::Mode::explicit_values;
            s.epsilon.values = detail::number_list(require(e, "values", "epsilon_set"), "epsilon_set.values");
            if (s.epsilon.values.empty()) scenario_error("epsilon_set.values", "must not be empty");
            for (double v : s.epsilon.values)
                if (v < 0.0) scenario_error("epsilon_set.values", "values must be nonnegative");
        } else {
            scenario_error("epsilon_set.mode", "expected \"linear\" or \"explicit\"");
        }
    }

    if (doc.contains("maneuver")) {
        const auto& m = doc["maneuver"];
        if (!m.is_object()) scenario_error("maneuver", "expected an object");
        ManeuverSpec spec;
        spec.masses = detail::number_list(require(m, "masses", "maneuver"), "maneuver.masses");
        if (spec.masses.size() != n) scenario_error("maneuver.masses", "expected one mass per spacecraft");
        for (double v : spec.masses)
            if (!(v > 0.0)) scenario_error("maneuver.masses", "masses must be positive");
        spec.kappa = detail::number(require(m, "kappa", "maneuver"), "maneuver.kappa");
        spec.rho = detail::number(require(m, "rho", "maneuver"), "maneuver.rho");
        if (!(spec.kappa > 0.0)) scenario_error("maneuver.kappa", "must be positive");
        if (!(spec.rho > 0.0)) scenario_error("maneuver.rho", "must be positive");
        spec.xi_des = detail::vector_list(require(m, "xi_des", "maneuver"), "maneuver.xi_des", s.dimension);
        spec.xi0 = detail::vector_list(require(m, "xi0", "maneuver"), "maneuver.xi0", s.dimension);
        if (spec.xi_des.size() != n - 1) scenario_error("maneuver.xi_des", "expected N−1 relative positions");
        if (spec.xi0.size() != n - 1) scenario_error("maneuver.xi0", "expected N−1 relative positions");
        if (!m.contains("v0") || (m["v0"].is_number() && m["v0"].get<double>() == 0.0)) {
            spec.v0.assign(n, Vector(s.dimension, 0.0));
        } else {
            spec.v0 = detail::vector_list(m["v0"], "maneuver.v0", s.dimension);
            if (spec.v0.size() != n) scenario_error("maneuver.v0", "expected one velocity per spacecraft");
        }
        if (m.contains("dt")) spec.dt = detail::number(m["dt"], "maneuver.dt");
        if (m.contains("t_final")) spec.t_final = detail::number(m["t_final"], "maneuver.t_final");
        if (!(spec.dt > 0.0)) scenario_error("maneuver.dt", "must be positive");
        if (!(spec.t_final >= spec.dt)) scenario_error("maneuver.t_final", "must be at least dt");
        s.maneuver = std::move(spec);
    }

    // Geometry validation (coincident spacecraft and the like).
    (void)s.formation();
    return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Translate the byte offset into a line/column diagnostic.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::invalid_input, "malformed JSON at line " + std::to_string(line) + ", column " +
                                                  std::to_string(col) + ": " + e.what());
    }
    return parse_scenario(doc);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::invalid_input, "cannot open scenario file `" + path + "`");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

// Fully explicit form of a scenario; every default is written out.
inline nlohmann::json to_json(const Scenario& s) {
    using nlohmann::json;
    json doc = json::object();
    doc["formation"] = {{"dimension", s.dimension}, {"positions", detail::vectors_to_json(s.positions)}};
    if (s.command) doc["command"] = {{"relative_force", *s.command}};
    if (s.epsilon.mode == EpsilonSpec::Mode::linear) {
        doc["epsilon_set"] = {{"mode", "linear"},
                              {"count", s.epsilon.count},
                              {"lo_fraction", s.epsilon.lo_fraction},
                              {"hi_fraction", s.epsilon.hi_fraction}};
    } else {
        doc["epsilon_set"] = {{"mode", "explicit"}, {"values", s.epsilon.values}};
    }
    if (s.maneuver) {
        const auto& m = *s.maneuver;
        doc["maneuver"] = {{"masses", m.masses},
                           {"kappa", m.kappa},
                           {"rho", m.rho},
                           {"xi_des", detail::vectors_to_json(m.xi_des)},
                           {"xi0", detail::vectors_to_json(m.xi0)},
                           {"v0", detail::vectors_to_json(m.v0)},
                           {"dt", m.dt},
                           {"t_final", m.t_final}};
    }
    return doc;
}

}  // namespace coulomb
