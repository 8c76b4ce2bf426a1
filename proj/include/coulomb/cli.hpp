#pragma once

// Front-end workflows behind the `coulomb_cli` executable. Each command reads
// a scenario file, writes its result to the given streams and returns the
// process exit code: 0 success, 2 invalid input, 3 solver failure with a
// thruster-only fallback, 1 anything else.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "allocator.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "scenario.hpp"
#include "sdp.hpp"
#include "sim.hpp"

namespace coulomb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitFallback = 3;

struct CliOptions {
    std::optional<int> epsilon_count;
    std::optional<Vector> epsilon_list;
    std::string out_dir = ".";
    bool dump_normalized = false;
    std::optional<double> tol;
};

namespace detail {

// %.9g
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
    return buf;
}

inline const char* axis_name(std::size_t k) {
    static const char* names[] = {"x", "y", "z"};
    return k < 3 ? names[k] : "w";
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
    if (v && std::isfinite(*v)) return *v;
    return nullptr;
}

inline nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline nlohmann::json thrusts_json(const ThrustVector& t) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t i = 0; i < t.count(); ++i) {
        const auto ti = t.thrust(i);
        a.push_back(Vector(ti.begin(), ti.end()));
    }
    return a;
}

inline Scenario apply_options(Scenario s, const CliOptions& opt) {
    if (opt.epsilon_count && opt.epsilon_list)
        throw Error(ErrorCode::invalid_input, "--epsilon-count and --epsilon-list are mutually exclusive");
    if (opt.epsilon_count) {
        if (*opt.epsilon_count < 1) throw Error(ErrorCode::invalid_input, "--epsilon-count must be positive");
        s.epsilon.mode = EpsilonSpec::Mode::linear;
        s.epsilon.count = *opt.epsilon_count;
        s.epsilon.values.clear();
    }
    if (opt.epsilon_list) {
        if (opt.epsilon_list->empty()) throw Error(ErrorCode::invalid_input, "--epsilon-list is empty");
        for (double v : *opt.epsilon_list)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error(ErrorCode::invalid_input, "--epsilon-list values must be finite and ≥ 0");
        s.epsilon = EpsilonSpec::explicit_list(*opt.epsilon_list);
    }
    return s;
}

inline SolverSettings solver_settings(const CliOptions& opt) {
    SolverSettings s;
    if (opt.tol) {
        if (!(*opt.tol > 0.0) || !std::isfinite(*opt.tol))
            throw Error(ErrorCode::invalid_input, "--tol must be positive");
        s.tolerance = *opt.tol;
    }
    return s;
}

inline int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::invalid_formation:
        case ErrorCode::singular_geometry:
        case ErrorCode::invalid_input:
        case ErrorCode::undefined_metric:
            return kExitInvalid;
        default:
            return kExitFailure;
    }
}

// Loads the scenario, applies flag overrides and either dumps it or runs `body`.
template <class Body>
int run_command(const std::string& path, const CliOptions& opt, std::ostream& out, std::ostream& err, Body body) {
    try {
        const Scenario s = apply_options(load_scenario(path), opt);
        if (opt.dump_normalized) {
            out << to_json(s).dump(2) << '\n';
            return kExitOk;
        }
        return body(s, solver_settings(opt));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace detail

inline nlohmann::json allocation_to_json(const AllocationResult& r) {
    using nlohmann::json;
    json diags = json::array();
    for (const auto& d : r.diagnostics) {
        diags.push_back({{"epsilon", d.epsilon},
                         {"status", to_string(d.status)},
                         {"residual", detail::finite_or_null(d.residual)},
                         {"trace", detail::finite_or_null(d.trace)},
                         {"eigenvalues", d.eigenvalues},
                         {"iterations", d.iterations},
                         {"charges_microC", d.charges.microcoulombs()},
                         {"thrust_norm", d.thrust_norm},
                         {"percent_error", detail::finite_or_null(d.percent_error)}});
    }
    return {{"charges_microC", r.charges.microcoulombs()},
            {"thrusts_N", detail::thrusts_json(r.thrusts)},
            {"chosen_epsilon", detail::optional_number(r.chosen_epsilon)},
            {"percent_error", detail::optional_number(r.percent_error)},
            {"thrust_norm", r.thrust_norm},
            {"propellant_proxy", r.propellant},
            {"propellant_proxy_thruster_only", r.propellant_thruster_only},
            {"reduction_percent", detail::optional_number(r.reduction_percent())},
            {"solver_fallback", r.solver_fallback},
            {"diagnostics", std::move(diags)}};
}

inline int cmd_allocate(const std::string& path, const CliOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(path, opt, out, err, [&](const Scenario& s, const SolverSettings& settings) {
        const AllocationResult r = allocate(s.formation(), s.relative_force(), s.epsilon, settings);
        out << allocation_to_json(r).dump(2) << '\n';
        if (r.solver_fallback) {
            err << "warning: the SDP solver failed for every ε; thruster-only allocation reported\n";
            return kExitFallback;
        }
        return kExitOk;
    });
}

inline int cmd_sweep(const std::string& path, const CliOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(path, opt, out, err, [&](const Scenario& s, const SolverSettings& settings) {
        const AllocationContext ctx(s.formation(), s.relative_force());
        const std::size_t n = ctx.state().count();
        out << "epsilon_N,residual_N,trace";
        for (std::size_t i = 1; i <= n; ++i) out << ",lambda_" << i;
        out << ",percent_error,thrust_norm_N,status\n";

        bool any_optimal = false;
        bool any_failure = false;
        for (double eps : s.epsilon.sweep_values(ctx.command().norm())) {
            const EpsilonDiagnostic d = ctx.evaluate(eps, settings);
            any_optimal |= d.status == SdpStatus::optimal;
            any_failure |= d.status == SdpStatus::numerical_failure;
            out << detail::fmt9(d.epsilon) << ',' << detail::fmt9(d.residual) << ',' << detail::fmt9(d.trace);
            for (double l : d.eigenvalues) out << ',' << detail::fmt9(l);
            out << ',' << detail::fmt9(d.percent_error) << ',' << detail::fmt9(d.thrust_norm) << ','
                << to_string(d.status) << '\n';
        }
        if (!any_optimal && any_failure) {
            err << "warning: the SDP solver failed for every ε\n";
            return kExitFallback;
        }
        return kExitOk;
    });
}

inline void write_trajectory_csv(std::ostream& out, const ManeuverResult& result, std::size_t dim) {
    if (result.log.empty()) return;
    const auto& first = result.log.front();
    const std::size_t rel = first.xi.size() / dim;
    const std::size_t n = first.charges.size();
    out << "t_s";
    for (std::size_t i = 1; i <= rel; ++i)
        for (std::size_t k = 0; k < dim; ++k) out << ",xi" << i << '_' << detail::axis_name(k) << "_m";
    for (std::size_t k = 1; k <= first.command.size(); ++k) out << ",fcmd_" << k << "_N";
    for (std::size_t i = 1; i <= n; ++i) out << ",q" << i << "_microC";
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t k = 0; k < dim; ++k) out << ",T" << i << '_' << detail::axis_name(k) << "_N";
    out << ",percent_error,propellant_cum_Ns\n";

    double cum = 0.0;
    for (const auto& r : result.log) {
        cum += r.propellant_increment;
        out << detail::fmt9(r.t);
        for (double v : r.xi) out << ',' << detail::fmt9(v);
        for (double v : r.command.values) out << ',' << detail::fmt9(v);
        for (double v : r.charges.microcoulombs()) out << ',' << detail::fmt9(v);
        for (double v : r.thrusts.values) out << ',' << detail::fmt9(v);
        out << ',' << detail::fmt9(r.percent_error) << ',' << detail::fmt9(cum) << '\n';
    }
}

inline nlohmann::json summary_to_json(const ManeuverSummary& s) {
    return {{"avg_percent_error", detail::finite_or_null(s.avg_percent_error)},
            {"propellant_used", s.propellant_used},
            {"propellant_thruster_only", s.propellant_thruster_only},
            {"reduction_percent", detail::optional_number(s.reduction_percent)},
            {"steps", s.steps},
            {"fallback_steps", s.fallback_steps}};
}

inline int cmd_simulate(const std::string& path, const CliOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_command(path, opt, out, err, [&](const Scenario& s, const SolverSettings& settings) {
        const ManeuverConfig cfg = s.maneuver_config(settings);
        const ManeuverResult result = run_maneuver(cfg);

        namespace fs = std::filesystem;
        const fs::path dir(opt.out_dir);
        fs::create_directories(dir);
        std::ofstream traj(dir / "trajectory.csv");
        std::ofstream summary(dir / "summary.json");
        if (!traj || !summary) throw Error(ErrorCode::invalid_input, "cannot write to output directory `" + opt.out_dir + "`");
        write_trajectory_csv(traj, result, cfg.dim);
        summary << summary_to_json(result.summary).dump(2) << '\n';
        out << summary_to_json(result.summary).dump(2) << '\n';
        if (result.summary.fallback_steps > 0) {
            err << "warning: " << result.summary.fallback_steps
                << " step(s) fell back to thruster-only allocation after solver failure\n";
            return kExitFallback;
        }
        return kExitOk;
    });
}

// "0.05,0.1,0.15" → {0.05, 0.1, 0.15}
inline Vector parse_epsilon_list(const std::string& csv) {
    Vector v;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_input, "--epsilon-list: `" + item + "` is not a number");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos)
            throw Error(ErrorCode::invalid_input, "--epsilon-list: `" + item + "` is not a number");
        v.push_back(x);
    }
    return v;
}

}  // namespace coulomb
