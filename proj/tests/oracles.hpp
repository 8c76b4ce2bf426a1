#pragma once

// Independent reference computations used by the unit and acceptance suites.

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "coulomb/formation.hpp"
#include "coulomb/linalg.hpp"

namespace coulomb::testing {

// min k_c‖q‖² over a charge grid subject to ‖ΔF_C(q) − f‖ ≤ ε.
inline double grid_minimum_trace(const FormationState& s, const Vector& f, double eps, double half_width_micro,
                          int points) {
    const std::size_t n = s.count();
    const Matrix a = relative_coulomb_matrix(s);
    // Pair columns: ΔF_C = Σ_{i<j} k_c qᵢqⱼ (a_{i+jn} + a_{j+in}).
    std::vector<Vector> pair_cols;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Vector col(a.rows());
            for (std::size_t r = 0; r < a.rows(); ++r) col[r] = kCoulombConstant * (a(r, i + j * n) + a(r, j + i * n));
            pair_cols.push_back(col);
            pairs.emplace_back(i, j);
        }
    Vector axis(points);
    for (int k = 0; k < points; ++k)
        axis[k] = kMicro * (-half_width_micro + 2.0 * half_width_micro * k / (points - 1));

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(n, 0);
    Vector q(n), df(f.size());
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) q[i] = axis[idx[i]];
        const double tr = kCoulombConstant * dot(q, q);
        if (tr < best) {
            std::fill(df.begin(), df.end(), 0.0);
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                const double w = q[pairs[p].first] * q[pairs[p].second];
                for (std::size_t r = 0; r < df.size(); ++r) df[r] += w * pair_cols[p][r];
            }
            if (norm(df - f) <= eps) best = tr;
        }
        std::size_t k = 0;
        while (k < n && ++idx[k] == points) idx[k++] = 0;
        if (k == n) break;
    }
    return best;
}

}  // namespace coulomb::testing
