#pragma once

// Deep-space reconfiguration of a hybrid Coulomb formation: double-integrator
// spacecraft, a PD relative-force command law, and one allocation per step.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "allocator.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "linalg.hpp"
#include "sdp.hpp"

namespace coulomb {

struct ManeuverConfig {
    std::size_t dim = 3;
    Vector masses;                // kg, one per spacecraft
    double kappa = 0.05;          // 1/s²
    double rho = 0.2;             // 1/s
    std::vector<Vector> xi_des;   // N−1 desired relative positions (m)
    std::vector<Vector> x0;       // N initial positions (m)
    std::vector<Vector> v0;       // N initial velocities (m/s)
    double dt = 0.1;              // s
    double t_final = 60.0;        // s
    EpsilonSpec epsilon;
    SolverSettings solver;

    std::size_t count() const noexcept { return masses.size(); }

    // Mass used by the command law; the mean spacecraft mass.
    double gain_mass() const {
        double s = 0.0;
        for (double m : masses) s += m;
        return s / static_cast<double>(masses.size());
    }

    std::size_t step_count() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }

    void validate() const {
        const std::size_t n = count();
        if (n < 2) throw Error(ErrorCode::invalid_formation, "maneuver needs at least two spacecraft");
        if (dim < 1) throw Error(ErrorCode::invalid_formation, "spatial dimension must be positive");
        for (double m : masses)
            if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::invalid_input, "masses must be positive");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_input, "dt must be positive");
        if (!(t_final >= dt) || !std::isfinite(t_final)) throw Error(ErrorCode::invalid_input, "t_final must be ≥ dt");
        if (!(kappa > 0.0) || !(rho > 0.0))
            throw Error(ErrorCode::invalid_input, "gains must be positive for a Hurwitz relative loop");
        auto check = [&](const std::vector<Vector>& vs, std::size_t expected, const char* what) {
            if (vs.size() != expected)
                throw Error(ErrorCode::invalid_input, std::string(what) + " has the wrong number of entries");
            for (const auto& v : vs)
                if (v.size() != dim) throw Error(ErrorCode::invalid_input, std::string(what) + " has a wrong-size vector");
        };
        check(xi_des, n - 1, "xi_des");
        check(x0, n, "x0");
        check(v0, n, "v0");
    }
};

// x₁ = origin, x_{i+1} = xᵢ + ξᵢ
inline std::vector<Vector> positions_from_relative(const std::vector<Vector>& xi, std::size_t dim) {
    std::vector<Vector> x{Vector(dim, 0.0)};
    for (const auto& r : xi) {
        if (r.size() != dim) throw Error(ErrorCode::invalid_input, "relative position has the wrong dimension");
        x.push_back(x.back() + r);
    }
    return x;
}

inline Vector stack(const std::vector<Vector>& vs) {
    Vector out;
    for (const auto& v : vs) out.insert(out.end(), v.begin(), v.end());
    return out;
}

// ξᵢ = x_{i+1} − xᵢ on stacked vectors.
inline Vector relative_of(const Vector& stacked, std::size_t dim) {
    Vector rel(stacked.size() - dim);
    for (std::size_t k = 0; k < rel.size(); ++k) rel[k] = stacked[k + dim] - stacked[k];
    return rel;
}

// ΔF_cmdᵢ = −mκ(ξᵢ − ξ_desᵢ) − mϱ ξ̇ᵢ
inline RelativeForce command_law(std::span<const double> xi, std::span<const double> xi_dot,
                                 const ManeuverConfig& cfg) {
    const Vector xi_des = stack(cfg.xi_des);
    if (xi.size() != xi_des.size() || xi_dot.size() != xi_des.size())
        throw Error(ErrorCode::invalid_input, "relative state size does not match xi_des");
    const double m = cfg.gain_mass();
    RelativeForce f{Vector(xi.size())};
    for (std::size_t k = 0; k < xi.size(); ++k)
        f.values[k] = -m * cfg.kappa * (xi[k] - xi_des[k]) - m * cfg.rho * xi_dot[k];
    return f;
}

using Allocator = std::function<AllocationResult(const FormationState&, const RelativeForce&)>;

inline Allocator hybrid_allocator(EpsilonSpec spec, SolverSettings settings = {}) {
    return [spec = std::move(spec), settings](const FormationState& s, const RelativeForce& f) {
        return allocate(s, f, spec, settings);
    };
}

inline Allocator thruster_only_allocator() {
    return [](const FormationState& s, const RelativeForce& f) { return thruster_only_result(AllocationContext(s, f)); };
}

struct SimState {
    double t = 0.0;
    Vector positions;   // stacked, m
    Vector velocities;  // stacked, m/s
};

struct StepRecord {
    double t = 0.0;
    Vector xi;
    Vector xi_dot;
    RelativeForce command;
    ChargeVector charges;
    ThrustVector thrusts;
    double percent_error = std::numeric_limits<double>::quiet_NaN();  // NaN for a zero command
    double propellant_increment = 0.0;               // Σᵢ‖Tᵢ‖·dt, N·s
    double propellant_thruster_only_increment = 0.0;
    double net_coulomb_force = 0.0;  // ‖Σᵢ F_Cᵢ‖
    double command_residual = 0.0;   // ‖B·T + ΔF_C − ΔF_cmd‖
    bool fallback = false;
};

// One zero-order-hold step: allocate at the current state, hold Tᵢ + F_Cᵢ
// fixed, and integrate ẍᵢ = (Tᵢ + F_Cᵢ)/mᵢ with classical RK4.
inline StepRecord step(SimState& sim, const ManeuverConfig& cfg, const Allocator& allocator) {
    const std::size_t d = cfg.dim;
    const FormationState state = FormationState::from_stacked(d, sim.positions);

    StepRecord rec;
    rec.t = sim.t;
    rec.xi = relative_of(sim.positions, d);
    rec.xi_dot = relative_of(sim.velocities, d);
    rec.command = command_law(rec.xi, rec.xi_dot, cfg);

    const AllocationResult alloc = allocator(state, rec.command);
    rec.charges = alloc.charges;
    rec.thrusts = alloc.thrusts;
    rec.fallback = alloc.solver_fallback;
    if (alloc.percent_error) rec.percent_error = *alloc.percent_error;
    rec.propellant_increment = alloc.thrusts.sum_of_norms() * cfg.dt;
    rec.propellant_thruster_only_increment = alloc.propellant_thruster_only * cfg.dt;

    const Vector coulomb = coulomb_forces(state, alloc.charges);
    const RelativeForce achieved{relative_thrust(alloc.thrusts).values + relative_coulomb_force(state, alloc.charges).values};
    rec.command_residual = norm(achieved.values - rec.command.values);
    Vector net(d, 0.0);
    for (std::size_t k = 0; k < coulomb.size(); ++k) net[k % d] += coulomb[k];
    rec.net_coulomb_force = norm(net);

    Vector accel(coulomb.size());
    for (std::size_t k = 0; k < accel.size(); ++k) accel[k] = (alloc.thrusts.values[k] + coulomb[k]) / cfg.masses[k / d];

    // y = (x, v), ẏ = (v, a) with a held constant over the step.
    const double h = cfg.dt;
    const Vector& x = sim.positions;
    const Vector& v = sim.velocities;
    const Vector k1x = v, k1v = accel;
    const Vector k2x = v + (0.5 * h) * k1v, k2v = accel;
    const Vector k3x = v + (0.5 * h) * k2v, k3v = accel;
    const Vector k4x = v + h * k3v, k4v = accel;
    sim.positions = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    sim.velocities = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    sim.t += h;
    return rec;
}

struct ManeuverSummary {
    double avg_percent_error = std::numeric_limits<double>::quiet_NaN();
    double propellant_used = 0.0;
    double propellant_thruster_only = 0.0;
    std::optional<double> reduction_percent;
    std::size_t steps = 0;
    std::size_t fallback_steps = 0;
};

struct ManeuverResult {
    std::vector<StepRecord> log;
    ManeuverSummary summary;
    SimState final_state;
};

inline SimState initial_state(const ManeuverConfig& cfg) { return {0.0, stack(cfg.x0), stack(cfg.v0)}; }

inline ManeuverResult run_maneuver(const ManeuverConfig& cfg, const Allocator& allocator) {
    cfg.validate();
    ManeuverResult out;
    SimState sim = initial_state(cfg);
    const std::size_t steps = cfg.step_count();
    out.log.reserve(steps);

    double pe_sum = 0.0;
    std::size_t pe_count = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        sim.t = static_cast<double>(k) * cfg.dt;
        StepRecord rec = step(sim, cfg, allocator);
        out.summary.propellant_used += rec.propellant_increment;
        out.summary.propellant_thruster_only += rec.propellant_thruster_only_increment;
        if (std::isfinite(rec.percent_error)) {
            pe_sum += rec.percent_error;
            ++pe_count;
        }
        if (rec.fallback) ++out.summary.fallback_steps;
        out.log.push_back(std::move(rec));
    }
    out.summary.steps = steps;
    if (pe_count > 0) out.summary.avg_percent_error = pe_sum / static_cast<double>(pe_count);
    if (out.summary.propellant_thruster_only > 0.0)
        out.summary.reduction_percent = 100.0 * (1.0 - out.summary.propellant_used / out.summary.propellant_thruster_only);
    out.final_state = sim;
    return out;
}

inline ManeuverResult run_maneuver(const ManeuverConfig& cfg) {
    return run_maneuver(cfg, hybrid_allocator(cfg.epsilon, cfg.solver));
}

}  // namespace coulomb
