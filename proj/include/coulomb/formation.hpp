#pragma once

// Point-charge force model of a hybrid Coulomb formation: per-spacecraft
// Coulomb forces, the linear map A(x) from vec(qqᵀ) to relative Coulomb
// forces, and the relative thrust map B.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace coulomb {

inline constexpr double kCoulombConstant = 8.99e9;  // N·m²/C²
inline constexpr double kMicro = 1e-6;
inline constexpr double kMinSeparation = 1e-6;  // m

class FormationState {
public:
    FormationState() = default;

    FormationState(std::size_t dim, std::span<const Vector> positions) : dim_(dim) {
        if (dim == 0) throw Error(ErrorCode::invalid_formation, "spatial dimension must be positive");
        if (positions.size() < 2) throw Error(ErrorCode::invalid_formation, "a formation needs at least two spacecraft");
        stacked_.reserve(dim * positions.size());
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (positions[i].size() != dim) {
                throw Error(ErrorCode::invalid_formation, "position " + std::to_string(i + 1) + " has " +
                                                              std::to_string(positions[i].size()) +
                                                              " components, expected " + std::to_string(dim));
            }
            stacked_.insert(stacked_.end(), positions[i].begin(), positions[i].end());
        }
        validate();
    }

    FormationState(std::size_t dim, std::initializer_list<Vector> positions)
        : FormationState(dim, std::span<const Vector>(positions.begin(), positions.size())) {}

    // x = Col(x₁, …, x_N)
    static FormationState from_stacked(std::size_t dim, Vector stacked) {
        if (dim == 0 || stacked.size() % dim != 0)
            throw Error(ErrorCode::invalid_formation, "stacked position length is not a multiple of the dimension");
        FormationState s;
        s.dim_ = dim;
        s.stacked_ = std::move(stacked);
        if (s.count() < 2) throw Error(ErrorCode::invalid_formation, "a formation needs at least two spacecraft");
        s.validate();
        return s;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t count() const noexcept { return dim_ == 0 ? 0 : stacked_.size() / dim_; }
    std::span<const double> position(std::size_t i) const { return {stacked_.data() + i * dim_, dim_}; }
    const Vector& stacked() const noexcept { return stacked_; }

    double separation(std::size_t i, std::size_t j) const {
        double s = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            const double diff = stacked_[i * dim_ + k] - stacked_[j * dim_ + k];
            s += diff * diff;
        }
        return std::sqrt(s);
    }

    // (xᵢ − xⱼ)/‖xᵢ − xⱼ‖³
    Vector inverse_square_direction(std::size_t i, std::size_t j) const {
        const double r = separation(i, j);
        const double r3 = r * r * r;
        Vector g(dim_);
        for (std::size_t k = 0; k < dim_; ++k) g[k] = (stacked_[i * dim_ + k] - stacked_[j * dim_ + k]) / r3;
        return g;
    }

private:
    void validate() const {
        for (std::size_t i = 0; i < count(); ++i) {
            for (double v : position(i))
                if (!std::isfinite(v)) throw Error(ErrorCode::invalid_formation, "non-finite position");
            for (std::size_t j = i + 1; j < count(); ++j) {
                if (separation(i, j) < kMinSeparation) {
                    throw Error(ErrorCode::singular_geometry, "spacecraft " + std::to_string(i + 1) + " and " +
                                                                  std::to_string(j + 1) + " are coincident");
                }
            }
        }
    }

    std::size_t dim_ = 0;
    Vector stacked_;
};

// Charges in coulombs. Interfaces display microcoulombs.
struct ChargeVector {
    Vector values;

    static ChargeVector zeros(std::size_t n) { return {Vector(n, 0.0)}; }
    static ChargeVector from_microcoulombs(std::span<const double> micro) {
        ChargeVector q{Vector(micro.begin(), micro.end())};
        for (double& v : q.values) v *= kMicro;
        return q;
    }

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }

    Vector microcoulombs() const {
        Vector m = values;
        for (double& v : m) v /= kMicro;
        return m;
    }

    ChargeVector operator-() const {
        ChargeVector n = *this;
        for (double& v : n.values) v = -v;
        return n;
    }
};

// Stacked thrusts T = Col(T₁, …, T_N), newtons.
struct ThrustVector {
    std::size_t dim = 0;
    Vector values;

    static ThrustVector zeros(std::size_t count, std::size_t dim) { return {dim, Vector(count * dim, 0.0)}; }

    std::size_t count() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
    std::span<const double> thrust(std::size_t i) const { return {values.data() + i * dim, dim}; }

    double norm() const { return coulomb::norm(values); }

    // Σᵢ‖Tᵢ‖, the propellant proxy.
    double sum_of_norms() const {
        double s = 0.0;
        for (std::size_t i = 0; i < count(); ++i) s += coulomb::norm(thrust(i));
        return s;
    }
};

// Stacked relative forces Col(ΔF₁, …, ΔF_{N−1}), newtons.
struct RelativeForce {
    Vector values;

    std::size_t size() const noexcept { return values.size(); }
    double norm() const { return coulomb::norm(values); }
    bool is_zero() const {
        for (double v : values)
            if (v != 0.0) return false;
        return true;
    }
};

inline void check_charges(const FormationState& state, const ChargeVector& q) {
    if (q.size() != state.count())
        throw Error(ErrorCode::invalid_input, "charge vector length does not match the formation size");
    for (double v : q.values)
        if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, "non-finite charge");
}

// F_Cᵢ = Σ_{j≠i} k_c qᵢqⱼ (xᵢ − xⱼ)/‖xᵢ − xⱼ‖³ (index is zero-based)
inline Vector coulomb_force_on(std::size_t i, const FormationState& state, const ChargeVector& q) {
    check_charges(state, q);
    if (i >= state.count()) throw Error(ErrorCode::invalid_input, "spacecraft index out of range");
    Vector f(state.dim(), 0.0);
    for (std::size_t j = 0; j < state.count(); ++j) {
        if (j == i) continue;
        const double qq = kCoulombConstant * q[i] * q[j];
        if (qq == 0.0) continue;
        const Vector g = state.inverse_square_direction(i, j);
        for (std::size_t k = 0; k < f.size(); ++k) f[k] += qq * g[k];
    }
    return f;
}

// Col(F_C₁, …, F_C_N)
inline Vector coulomb_forces(const FormationState& state, const ChargeVector& q) {
    Vector all;
    all.reserve(state.count() * state.dim());
    for (std::size_t i = 0; i < state.count(); ++i) {
        const Vector f = coulomb_force_on(i, state, q);
        all.insert(all.end(), f.begin(), f.end());
    }
    return all;
}

// aᵢ(x) = Σ_{j≠i} vec(He(Υ(i,j)))ᵀ ⊗ (xᵢ − xⱼ)/‖xᵢ − xⱼ‖³, a d×N² matrix with
// F_Cᵢ = k_c aᵢ(x) vec(qqᵀ).
inline Matrix coulomb_row_map(std::size_t i, const FormationState& state) {
    const std::size_t n = state.count();
    const std::size_t d = state.dim();
    if (i >= n) throw Error(ErrorCode::invalid_input, "spacecraft index out of range");
    Matrix a(d, n * n);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vector g = state.inverse_square_direction(i, j);
        // He(Υ(i,j)) has ½ at (i,j) and (j,i); vec index of (r,s) is r + s·n.
        for (std::size_t k = 0; k < d; ++k) {
            a(k, i + j * n) += 0.5 * g[k];
            a(k, j + i * n) += 0.5 * g[k];
        }
    }
    return a;
}

// A(x) = Col(a₂ − a₁, …, a_N − a_{N−1}), shape d(N−1)×N².
inline Matrix relative_coulomb_matrix(const FormationState& state) {
    const std::size_t n = state.count();
    const std::size_t d = state.dim();
    Matrix a(d * (n - 1), n * n);
    Matrix prev = coulomb_row_map(0, state);
    for (std::size_t i = 1; i < n; ++i) {
        Matrix next = coulomb_row_map(i, state);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t c = 0; c < n * n; ++c) a((i - 1) * d + k, c) = next(k, c) - prev(k, c);
        prev = std::move(next);
    }
    return a;
}

// ΔF_C via pairwise differences F_C_{i+1} − F_Cᵢ.
inline RelativeForce relative_coulomb_force(const FormationState& state, const ChargeVector& q) {
    const Vector all = coulomb_forces(state, q);
    const std::size_t d = state.dim();
    RelativeForce rel{Vector(d * (state.count() - 1))};
    for (std::size_t k = 0; k < rel.values.size(); ++k) rel.values[k] = all[k + d] - all[k];
    return rel;
}

// ΔF_C = k_c A(x) vec(qqᵀ), using a precomputed A(x).
inline RelativeForce relative_coulomb_force(const Matrix& relative_map, const ChargeVector& q) {
    Vector qq = kron(q.values, q.values);  // vec(qqᵀ) = q ⊗ q
    for (double& v : qq) v *= kCoulombConstant;
    return {relative_map * qq};
}

// ΔF_T = B·T = Col(T₂ − T₁, …, T_N − T_{N−1})
inline RelativeForce relative_thrust(const ThrustVector& t) {
    if (t.dim == 0 || t.count() < 2) throw Error(ErrorCode::invalid_formation, "thrust vector needs two spacecraft");
    RelativeForce rel{Vector(t.values.size() - t.dim)};
    for (std::size_t k = 0; k < rel.values.size(); ++k) rel.values[k] = t.values[k + t.dim] - t.values[k];
    return rel;
}

}  // namespace coulomb
