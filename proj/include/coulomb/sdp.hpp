#pragma once

// Trace-minimization semidefinite program
//
//     minimize   Tr(Q)
//     subject to ‖A vec(Q) − f‖ ≤ ε,   Q ⪰ 0,
//
// solved by ADMM over the product of the PSD cone and the ε-ball around f.
// The symmetric variable is carried as svec(Q): the upper triangle with
// off-diagonal entries scaled by √2, so that ⟨svec X, svec Y⟩ = Tr(XY) and the
// PSD projection is exact.
//
// Termination is certificate based. The returned Q is always the PSD
// projection iterate; it is accepted once it is ε-feasible (to a relative
// 1e-6 of ε) and its trace is within `tolerance` of a dual-feasible objective
//
//     maximize   wᵀf − ε‖w‖   subject to   I − mat(Aᵀw) ⪰ 0.
//
// Infeasibility is certified by a vector w with mat(Aᵀw) ⪯ 0 and wᵀf > ε‖w‖.
// The presolve takes w as the component of f orthogonal to range(A), for
// which Aᵀw = 0. For the Coulomb map this test is exact: A(x) ignores the
// diagonal of Q, which can be raised freely to reach any off-diagonal pattern,
// so A·PSD = range(A). The orthogonal complement is nontrivial because
// central internal forces carry no net torque.
//
// Before iterating, Q = D Q' D with a positive diagonal D chosen so that the
// pair columns of A(D⊗D) have comparable norms (a least-squares fit in log
// space). The congruence maps the PSD cone onto itself and turns the
// objective into Tr(D²Q').

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "errors.hpp"
#include "formation.hpp"
#include "linalg.hpp"

namespace coulomb {

inline std::size_t svec_size(std::size_t n) { return n * (n + 1) / 2; }

// svec order: column by column over the upper triangle, (0,0), (0,1), (1,1), (0,2), …
inline Vector svec(const SymMatrix& m) {
    const std::size_t n = m.size();
    Vector s;
    s.reserve(svec_size(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= j; ++i) s.push_back(i == j ? m(i, j) : std::sqrt(2.0) * m(i, j));
    return s;
}

inline SymMatrix smat(std::span<const double> s, std::size_t n) {
    if (s.size() != svec_size(n)) throw Error(ErrorCode::invalid_input, "svec length does not match dimension");
    SymMatrix m(n);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= j; ++i, ++k) m.set(i, j, i == j ? s[k] : s[k] / std::sqrt(2.0));
    return m;
}

// Linear map svec(Q) ↦ vec(Q), shape n²×n(n+1)/2.
inline Matrix svec_to_vec(std::size_t n) {
    Matrix m(n * n, svec_size(n));
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= j; ++i, ++k) {
            if (i == j) {
                m(i + j * n, k) = 1.0;
            } else {
                m(i + j * n, k) = 1.0 / std::sqrt(2.0);
                m(j + i * n, k) = 1.0 / std::sqrt(2.0);
            }
        }
    return m;
}

// Euclidean projection onto the PSD cone: clip negative eigenvalues.
inline SymMatrix project_psd(const SymMatrix& m) {
    const auto pairs = sym_eig(m);
    const std::size_t n = m.size();
    Matrix out(n, n);
    for (const auto& p : pairs) {
        if (p.value <= 0.0) continue;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out(i, j) += p.value * p.vector[i] * p.vector[j];
    }
    return SymMatrix(out);
}

struct TraceProblem {
    Matrix relative_map;  // A(x), d(N−1)×N²
    Vector command;       // ΔF_cmd
    double epsilon = 0.0;
    std::size_t n = 0;    // matrix dimension N

    void validate() const {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
            throw Error(ErrorCode::invalid_input, "epsilon must be finite and nonnegative");
        if (relative_map.cols() != n * n)
            throw Error(ErrorCode::invalid_input, "relative map column count must equal n²");
        if (relative_map.rows() != command.size())
            throw Error(ErrorCode::invalid_input, "command length does not match the relative map");
    }
};

enum class SdpStatus { optimal, infeasible, numerical_failure };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::infeasible: return "infeasible";
        case SdpStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

struct SdpSolution {
    SymMatrix gram;  // Q = k_c qqᵀ when rank one
    SdpStatus status = SdpStatus::numerical_failure;
    double residual = 0.0;      // ‖A vec(Q) − f‖
    double trace = 0.0;         // Tr(Q)
    double gap_estimate = 0.0;  // Tr(Q) minus the best dual bound, same units as Tr(Q)
    int iterations = 0;
};

struct SolverSettings {
    double tolerance = 1e-8;  // relative duality gap
    int max_iterations = 50000;
    double over_relaxation = 1.6;
    int check_interval = 10;
};

inline TraceProblem build_trace_problem(const FormationState& state, const RelativeForce& command, double epsilon) {
    if (command.size() != state.dim() * (state.count() - 1))
        throw Error(ErrorCode::invalid_input, "relative force command must have d(N−1) components");
    TraceProblem p{relative_coulomb_matrix(state), command.values, epsilon, state.count()};
    p.validate();
    return p;
}

namespace detail {

// Largest singular value by power iteration on MᵀM.
inline double spectral_norm(const Matrix& m) {
    if (m.empty()) return 0.0;
    Vector x(m.cols(), 1.0);
    double sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vector y = m.transpose_times(m * x);
        const double ny = norm(y);
        if (ny == 0.0) return 0.0;
        const double next = std::sqrt(ny / norm(x));
        for (double& v : y) v /= ny;
        x = std::move(y);
        if (std::abs(next - sigma) <= 1e-12 * next) return next;
        sigma = next;
    }
    return sigma;
}

inline void project_ball(std::span<double> z, std::span<const double> center, double radius) {
    double dist2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) dist2 += (z[i] - center[i]) * (z[i] - center[i]);
    const double dist = std::sqrt(dist2);
    if (dist <= radius) return;
    const double s = radius / dist;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = center[i] + s * (z[i] - center[i]);
}

inline double max_eigenvalue(std::span<const double> s, std::size_t n) { return sym_eig(smat(s, n)).back().value; }

// Diagonal d with dᵢdⱼ‖a_{i+jn} + a_{j+in}‖ ≈ 1 for every coupled pair,
// normalized to unit geometric mean.
inline Vector congruence_scaling(const Matrix& relative_map, std::size_t n) {
    Matrix normal = Matrix::identity(n);
    normal *= 1e-8;
    Vector rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double c2 = 0.0;
            for (std::size_t r = 0; r < relative_map.rows(); ++r) {
                const double v = relative_map(r, i + j * n) + relative_map(r, j + i * n);
                c2 += v * v;
            }
            if (!(c2 > 0.0)) continue;
            const double target = -0.5 * std::log(c2);
            normal(i, i) += 1.0;
            normal(j, j) += 1.0;
            normal(i, j) += 1.0;
            normal(j, i) += 1.0;
            rhs[i] += target;
            rhs[j] += target;
        }
    }
    Vector x = Cholesky(normal).solve(rhs);
    double mean = 0.0;
    for (double v : x) mean += v / static_cast<double>(n);
    for (double& v : x) v = std::exp(v - mean);
    return x;
}

}  // namespace detail

inline SdpSolution solve_trace(const TraceProblem& problem, const SolverSettings& settings = {}) {
    problem.validate();
    const std::size_t n = problem.n;
    const std::size_t p = svec_size(n);
    const std::size_t m = problem.command.size();

    SdpSolution sol;
    sol.gram = SymMatrix(n);

    // Q = 0 is feasible when ε ≥ ‖f‖, and Tr ≥ 0 on the PSD cone, so it is optimal.
    const double f_norm = norm(problem.command);
    if (f_norm == 0.0 || problem.epsilon >= f_norm) {
        sol.status = SdpStatus::optimal;
        sol.residual = f_norm;
        return sol;
    }

    const Vector dscale = detail::congruence_scaling(problem.relative_map, n);
    Matrix a_congruent = problem.relative_map;
    for (std::size_t r = 0; r < a_congruent.rows(); ++r)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a_congruent(r, i + j * n) *= dscale[i] * dscale[j];
    const Matrix a_svec = a_congruent * svec_to_vec(n);
    const double a_norm = detail::spectral_norm(a_svec);
    if (a_norm == 0.0) {
        // Coulomb forces cannot produce anything; only Q = 0 is meaningful.
        sol.status = SdpStatus::infeasible;
        sol.residual = f_norm;
        return sol;
    }

    // Scaled problem: Â = A/‖A‖, f̂ = f/‖f‖, ε̂ = ε/‖f‖, Q = (‖f‖/‖A‖)·Q̂.
    Matrix a_hat = a_svec * (1.0 / a_norm);
    Vector f_hat = (1.0 / f_norm) * problem.command;
    const double eps_hat = problem.epsilon / f_norm;
    const double unscale = f_norm / a_norm;

    // Distance from f̂ to range(Â) via the eigenvectors of ÂÂᵀ.
    const double range_gap = [&] {
        const auto pairs = sym_eig(SymMatrix(a_hat * a_hat.transpose()));
        const double top = pairs.back().value;
        Vector projected(m, 0.0);
        for (const auto& pr : pairs) {
            if (pr.value <= 1e-12 * top) continue;
            const double coeff = dot(pr.vector, f_hat);
            for (std::size_t i = 0; i < m; ++i) projected[i] += coeff * pr.vector[i];
        }
        return norm(f_hat - projected);
    }();
    if (eps_hat < range_gap * (1.0 - 1e-9)) {
        sol.status = SdpStatus::infeasible;
        sol.residual = range_gap * f_norm;
        sol.gap_estimate = std::numeric_limits<double>::infinity();
        return sol;
    }

    Vector c(p, 0.0);  // svec(D²)
    for (std::size_t j = 0; j < n; ++j) c[j * (j + 1) / 2 + j] = dscale[j] * dscale[j];

    Matrix kkt = Matrix::identity(p);
    kkt += a_hat.transpose() * a_hat;
    const Cholesky chol(kkt);

    Vector s(p, 0.0), z1(p, 0.0), z2(m, 0.0), u1(p, 0.0), u2(m, 0.0);
    double rho = 1.0;
    const double alpha = settings.over_relaxation;
    const double feas_tol = eps_hat > 0.0 ? 0.5e-6 * eps_hat : settings.tolerance;

    Vector best_feasible;
    double best_feasible_trace = std::numeric_limits<double>::infinity();
    double best_gap = std::numeric_limits<double>::infinity();
    int last_rho_update = 0;

    auto residual_of = [&](const Vector& sv) { return norm(a_hat * sv - f_hat); };

    auto finish = [&](const Vector& sv, SdpStatus status, int iters, double gap) {
        sol.status = status;
        sol.iterations = iters;
        const SymMatrix scaled = smat(unscale * sv, n);
        sol.gram = SymMatrix(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) sol.gram.set(i, j, dscale[i] * scaled(i, j) * dscale[j]);
        const Vector vq = vec(sol.gram.matrix());
        sol.residual = norm(problem.relative_map * vq - problem.command);
        sol.trace = sol.gram.trace();
        sol.gap_estimate = std::isfinite(gap) ? gap * unscale : gap;
        return sol;
    };

    for (int iter = 1; iter <= settings.max_iterations; ++iter) {
        // s-update: (I + ÂᵀÂ)s = (z1 − u1) + Âᵀ(z2 − u2) − c/ρ
        Vector rhs = z1 - u1;
        const Vector at = a_hat.transpose_times(z2 - u2);
        for (std::size_t i = 0; i < p; ++i) rhs[i] += at[i] - c[i] / rho;
        chol.solve_in_place(rhs);
        s = std::move(rhs);
        const Vector as = a_hat * s;

        Vector h1(p), h2(m);
        for (std::size_t i = 0; i < p; ++i) h1[i] = alpha * s[i] + (1.0 - alpha) * z1[i];
        for (std::size_t i = 0; i < m; ++i) h2[i] = alpha * as[i] + (1.0 - alpha) * z2[i];

        const Vector z1_old = z1;
        const Vector z2_old = z2;
        z1 = svec(project_psd(smat(h1 + u1, n)));
        z2 = h2 + u2;
        detail::project_ball(z2, f_hat, eps_hat);
        for (std::size_t i = 0; i < p; ++i) u1[i] += h1[i] - z1[i];
        for (std::size_t i = 0; i < m; ++i) u2[i] += h2[i] - z2[i];

        if (iter % settings.check_interval != 0) continue;

        // Primal candidate z1 (PSD by construction).
        const double res = residual_of(z1);
        const double primal = dot(c, z1);
        const bool feasible = res - eps_hat <= feas_tol;

        // Dual candidate w = −ρu₂, scaled into D² − mat(Âᵀw) ⪰ 0.
        Vector w = (-rho) * u2;
        Vector slack = a_hat.transpose_times(w);
        for (std::size_t j = 0, k = 0; j < n; ++j)
            for (std::size_t i = 0; i <= j; ++i, ++k) slack[k] /= dscale[i] * dscale[j];
        const double lmax = detail::max_eigenvalue(slack, n);
        if (lmax > 1.0) w = (1.0 / lmax) * w;
        const double dual = dot(w, f_hat) - eps_hat * norm(w);
        const double gap = primal - dual;

        if (feasible) {
            if (primal < best_feasible_trace) {
                best_feasible_trace = primal;
                best_feasible = z1;
            }
            best_gap = std::min(best_gap, gap);
            if (std::abs(gap) <= settings.tolerance * (1.0 + std::abs(primal) + std::abs(dual))) {
                return finish(z1, SdpStatus::optimal, iter, gap);
            }
        }

        // Residual balancing for ρ.
        if (iter - last_rho_update >= 50) {
            double r_pri = 0.0, r_dual = 0.0;
            for (std::size_t i = 0; i < p; ++i) r_pri += (s[i] - z1[i]) * (s[i] - z1[i]);
            for (std::size_t i = 0; i < m; ++i) r_pri += (as[i] - z2[i]) * (as[i] - z2[i]);
            Vector dz = z1 - z1_old;
            const Vector adz = a_hat.transpose_times(z2 - z2_old);
            for (std::size_t i = 0; i < p; ++i) dz[i] += adz[i];
            r_pri = std::sqrt(r_pri);
            r_dual = rho * norm(dz);
            double factor = 1.0;
            if (r_pri > 5.0 * r_dual) factor = 2.0;
            if (r_dual > 5.0 * r_pri) factor = 0.5;
            if (factor != 1.0 && rho * factor >= 1e-6 && rho * factor <= 1e6) {
                rho *= factor;
                for (double& v : u1) v /= factor;
                for (double& v : u2) v /= factor;
                last_rho_update = iter;
            }
        }
    }

    // Cap reached. The presolve has established feasibility, so this is a
    // numerical failure; the best feasible iterate (else the last one) is returned.
    return finish(best_feasible.empty() ? z1 : best_feasible, SdpStatus::numerical_failure, settings.max_iterations,
                  best_gap);
}

}  // namespace coulomb
