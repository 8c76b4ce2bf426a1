#pragma once

// Shared fixtures for the test suites: seeded random instances and the
// bundled scenario paths.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "coulomb/formation.hpp"
#include "coulomb/linalg.hpp"

namespace coulomb::testing {

inline std::string scenario_path(const std::string& name) { return std::string(COULOMB_SCENARIO_DIR) + "/" + name; }

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

class Rng {
public:
    explicit Rng(unsigned seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
    }

    Vector vector(std::size_t n, double lo, double hi) {
        Vector v(n);
        for (double& x : v) x = uniform(lo, hi);
        return v;
    }

    // Positions in a cube of side `extent`, pairwise separated by at least `min_sep`.
    FormationState formation(std::size_t count, std::size_t dim, double extent = 100.0, double min_sep = 1.0) {
        for (;;) {
            std::vector<Vector> p;
            for (std::size_t i = 0; i < count; ++i) p.push_back(vector(dim, -extent / 2, extent / 2));
            bool ok = true;
            for (std::size_t i = 0; i < count && ok; ++i)
                for (std::size_t j = i + 1; j < count && ok; ++j) ok = norm(p[i] - p[j]) >= min_sep;
            if (ok) return FormationState(dim, p);
        }
    }

    // Charges in coulombs, entries within ±`micro` μC.
    ChargeVector charges(std::size_t n, double micro = 100.0) {
        return ChargeVector::from_microcoulombs(vector(n, -micro, micro));
    }

    SymMatrix symmetric(std::size_t n, double scale = 1.0) {
        SymMatrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) m.set(i, j, uniform(-scale, scale));
        return m;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace coulomb::testing
