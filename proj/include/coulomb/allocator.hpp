#pragma once

// Control allocation for hybrid Coulomb formations.
//
// For each ε in a search set the trace SDP is solved, a charge vector is read
// off the dominant eigenpair of the optimal Q (Q = k_c qqᵀ inverted), and the
// thrusters complete the command with the minimum-norm T = B†(ΔF_cmd − ΔF_C).
// The candidate with the smallest ‖T‖ wins; the thruster-only allocation
// (q = 0, T = B†ΔF_cmd) seeds the search, so the result is never worse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "formation.hpp"
#include "linalg.hpp"
#include "sdp.hpp"

namespace coulomb {

// Finite ascending ε values inside [0, ‖ΔF_cmd‖).
class EpsilonSearchSet {
public:
    EpsilonSearchSet(Vector values, double command_norm) : values_(std::move(values)) {
        if (values_.empty()) throw Error(ErrorCode::invalid_input, "epsilon search set is empty");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double e = values_[i];
            if (!(e >= 0.0) || !(e < command_norm))
                throw Error(ErrorCode::invalid_input, "epsilon " + std::to_string(e) + " outside [0, ‖ΔF_cmd‖)");
            if (i > 0 && !(values_[i - 1] < e))
                throw Error(ErrorCode::invalid_input, "epsilon search set must be strictly ascending");
        }
    }

    // `count` points spaced linearly over [lo·‖ΔF_cmd‖, hi·‖ΔF_cmd‖].
    static EpsilonSearchSet linear(double command_norm, int count, double lo_fraction = 0.01,
                                   double hi_fraction = 0.999) {
        if (count < 1) throw Error(ErrorCode::invalid_input, "epsilon count must be positive");
        if (!(0.0 <= lo_fraction && lo_fraction <= hi_fraction && hi_fraction < 1.0))
            throw Error(ErrorCode::invalid_input, "epsilon fractions must satisfy 0 ≤ lo ≤ hi < 1");
        Vector v;
        if (count == 1) {
            v.push_back(lo_fraction * command_norm);
        } else {
            for (int k = 0; k < count; ++k)
                v.push_back(command_norm * (lo_fraction + (hi_fraction - lo_fraction) * k / (count - 1)));
        }
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return {std::move(v), command_norm};
    }

    const Vector& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    Vector values_;
};

// How to build the search set for a particular command.
struct EpsilonSpec {
    enum class Mode { linear, explicit_values };

    Mode mode = Mode::linear;
    int count = 30;
    double lo_fraction = 0.01;
    double hi_fraction = 0.999;
    Vector values;  // absolute ε (N), explicit mode only

    bool operator==(const EpsilonSpec&) const = default;

    static EpsilonSpec explicit_list(Vector v) {
        EpsilonSpec s;
        s.mode = Mode::explicit_values;
        s.values = std::move(v);
        return s;
    }

    // Values handed to the SDP for diagnostics; explicit values are kept as
    // given (sorted), including any at or beyond ‖ΔF_cmd‖.
    Vector sweep_values(double command_norm) const {
        if (mode == Mode::linear) return EpsilonSearchSet::linear(command_norm, count, lo_fraction, hi_fraction).values();
        Vector v = values;
        for (double e : v)
            if (!(e >= 0.0) || !std::isfinite(e)) throw Error(ErrorCode::invalid_input, "epsilon values must be ≥ 0");
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }

    // Admissible search set; explicit values outside [0, ‖ΔF_cmd‖) are dropped.
    std::optional<EpsilonSearchSet> resolve(double command_norm) const {
        if (!(command_norm > 0.0)) return std::nullopt;
        Vector v = sweep_values(command_norm);
        std::erase_if(v, [&](double e) { return e >= command_norm; });
        if (v.empty()) return std::nullopt;
        return EpsilonSearchSet(std::move(v), command_norm);
    }
};

// Flip q so that its entry of largest magnitude is positive (first one on ties).
inline ChargeVector canonical_sign(ChargeVector q) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        if (std::abs(q.values[i]) > std::abs(q.values[arg])) arg = i;
    if (!q.values.empty() && q.values[arg] < 0.0) q = -q;
    return q;
}

// q = √(λ_max/k_c)·v_max, with the canonical sign.
inline ChargeVector extract_charges(const SymMatrix& gram, double psd_tolerance = 1e-7) {
    const std::size_t n = gram.size();
    if (n == 0) return {};
    const auto pairs = sym_eig(gram);
    const double lmax = pairs.back().value;
    const double lmin = pairs.front().value;
    if (lmax < -psd_tolerance || lmin < -psd_tolerance * (1.0 + std::abs(lmax)))
        throw Error(ErrorCode::invalid_input, "charge extraction needs a positive semidefinite matrix");
    if (lmax <= 1e-18 * kCoulombConstant) return ChargeVector::zeros(n);
    const double scale = std::sqrt(lmax / kCoulombConstant);
    ChargeVector q{pairs.back().vector};
    for (double& v : q.values) v *= scale;
    return canonical_sign(std::move(q));
}

// T = B†(ΔF_cmd − ΔF_C(x, q))
inline ThrustVector complete_thrust(const FormationState& state, const RelativeForce& command, const ChargeVector& q,
                                    const Matrix& b_pinv) {
    const RelativeForce coulomb = relative_coulomb_force(state, q);
    if (command.size() != coulomb.size())
        throw Error(ErrorCode::invalid_input, "relative force command must have d(N−1) components");
    return {state.dim(), b_pinv * (command.values - coulomb.values)};
}

inline ThrustVector complete_thrust(const FormationState& state, const RelativeForce& command,
                                    const ChargeVector& q) {
    return complete_thrust(state, command, q, difference_pseudoinverse(state.count(), state.dim()));
}

// 100·‖ΔF_C(x, q) − ΔF_cmd‖/‖ΔF_cmd‖
inline double percent_error(const FormationState& state, const ChargeVector& q, const RelativeForce& command) {
    const double cmd_norm = command.norm();
    if (!(cmd_norm > 0.0)) throw Error(ErrorCode::undefined_metric, "percent error of a zero command");
    const RelativeForce coulomb = relative_coulomb_force(state, q);
    if (command.size() != coulomb.size())
        throw Error(ErrorCode::invalid_input, "relative force command must have d(N−1) components");
    return 100.0 * norm(coulomb.values - command.values) / cmd_norm;
}

struct EpsilonDiagnostic {
    double epsilon = 0.0;
    SdpStatus status = SdpStatus::numerical_failure;
    Vector eigenvalues;  // of Q, ascending
    double residual = 0.0;
    double trace = 0.0;
    int iterations = 0;
    ChargeVector charges;
    double thrust_norm = 0.0;
    double percent_error = 0.0;
};

struct AllocationResult {
    ChargeVector charges;
    ThrustVector thrusts;
    std::optional<double> chosen_epsilon;  // empty when thruster-only wins
    double thrust_norm = 0.0;              // ‖T‖
    std::optional<double> percent_error;   // empty for a zero command
    double propellant = 0.0;               // Σᵢ‖Tᵢ‖
    double propellant_thruster_only = 0.0;
    bool solver_fallback = false;  // no ε produced a usable Q because the solver failed
    std::vector<EpsilonDiagnostic> diagnostics;

    std::optional<double> reduction_percent() const {
        if (!(propellant_thruster_only > 0.0)) return std::nullopt;
        return 100.0 * (1.0 - propellant / propellant_thruster_only);
    }
};

// Shared per-command data for evaluating many ε values.
class AllocationContext {
public:
    AllocationContext(const FormationState& state, const RelativeForce& command)
        : state_(state),
          command_(command),
          b_pinv_(difference_pseudoinverse(state.count(), state.dim())),
          relative_map_(relative_coulomb_matrix(state)) {
        if (command.size() != state.dim() * (state.count() - 1))
            throw Error(ErrorCode::invalid_input, "relative force command must have d(N−1) components");
        for (double v : command.values)
            if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, "non-finite relative force command");
    }

    const FormationState& state() const noexcept { return state_; }
    const RelativeForce& command() const noexcept { return command_; }
    const Matrix& b_pinv() const noexcept { return b_pinv_; }

    ThrustVector thruster_only() const { return {state_.dim(), b_pinv_ * command_.values}; }

    EpsilonDiagnostic evaluate(double epsilon, const SolverSettings& settings) const {
        const TraceProblem problem{relative_map_, command_.values, epsilon, state_.count()};
        const SdpSolution sol = solve_trace(problem, settings);

        EpsilonDiagnostic diag;
        diag.epsilon = epsilon;
        diag.status = sol.status;
        diag.residual = sol.residual;
        diag.trace = sol.trace;
        diag.iterations = sol.iterations;
        for (const auto& p : sym_eig(sol.gram)) diag.eigenvalues.push_back(p.value);
        diag.charges = sol.status == SdpStatus::optimal ? extract_charges(sol.gram)
                                                        : ChargeVector::zeros(state_.count());
        diag.thrust_norm = complete_thrust(state_, command_, diag.charges, b_pinv_).norm();
        diag.percent_error = command_.norm() > 0.0 ? percent_error(state_, diag.charges, command_)
                                                   : std::numeric_limits<double>::quiet_NaN();
        return diag;
    }

private:
    FormationState state_;
    RelativeForce command_;
    Matrix b_pinv_;
    Matrix relative_map_;
};

inline AllocationResult thruster_only_result(const AllocationContext& ctx) {
    AllocationResult r;
    r.charges = ChargeVector::zeros(ctx.state().count());
    r.thrusts = ctx.thruster_only();
    r.thrust_norm = r.thrusts.norm();
    r.propellant = r.thrusts.sum_of_norms();
    r.propellant_thruster_only = r.propellant;
    if (ctx.command().norm() > 0.0) r.percent_error = 100.0;
    return r;
}

// Runs the ε-sweep in ascending order. A candidate replaces the incumbent only
// when its ‖T‖ is strictly smaller, so ties keep the smaller ε.
inline AllocationResult allocate(const FormationState& state, const RelativeForce& command,
                                 const std::optional<EpsilonSearchSet>& search, const SolverSettings& settings = {}) {
    const AllocationContext ctx(state, command);
    AllocationResult best = thruster_only_result(ctx);
    if (command.is_zero() || !search) return best;

    bool any_optimal = false;
    bool any_failure = false;
    for (double eps : search->values()) {
        EpsilonDiagnostic diag = ctx.evaluate(eps, settings);
        if (diag.status == SdpStatus::optimal) {
            any_optimal = true;
            if (diag.thrust_norm < best.thrust_norm) {
                best.charges = diag.charges;
                best.thrusts = complete_thrust(state, command, diag.charges, ctx.b_pinv());
                best.thrust_norm = diag.thrust_norm;
                best.chosen_epsilon = eps;
                best.percent_error = diag.percent_error;
            }
        } else if (diag.status == SdpStatus::numerical_failure) {
            any_failure = true;
        }
        best.diagnostics.push_back(std::move(diag));
    }
    best.propellant = best.thrusts.sum_of_norms();
    best.solver_fallback = !any_optimal && any_failure;
    return best;
}

inline AllocationResult allocate(const FormationState& state, const RelativeForce& command, const EpsilonSpec& spec,
                                 const SolverSettings& settings = {}) {
    return allocate(state, command, spec.resolve(command.norm()), settings);
}

}  // namespace coulomb
