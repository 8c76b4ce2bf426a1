#include <gtest/gtest.h>

#include <limits>

#include "coulomb/formation.hpp"
#include "support.hpp"

using namespace coulomb;
using coulomb::testing::max_abs_diff;
using coulomb::testing::Rng;

namespace {

FormationState four_craft() { return FormationState(2, {{0, 0}, {10, 0}, {5, 7}, {-10, 2}}); }

ErrorCode error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no coulomb::Error thrown";
    return ErrorCode::numerical_failure;
}

}  // namespace

TEST(Formation, TwoEqualChargesRepel) {
    // k_c·(10 μC)²·(x₁ − x₂)/10³ = 8.99e9·1e-10·(−10, 0)/1000
    const FormationState s(2, {{0, 0}, {10, 0}});
    const auto q = ChargeVector::from_microcoulombs(Vector{10, 10});
    const Vector f1 = coulomb_force_on(0, s, q);
    EXPECT_NEAR(f1[0], -8.99e-3, 1e-15);
    EXPECT_EQ(f1[1], 0.0);
    const Vector f2 = coulomb_force_on(1, s, q);
    EXPECT_NEAR(f2[0], 8.99e-3, 1e-15);
}

TEST(Formation, OppositeChargesAttract) {
    const FormationState s(1, {{0}, {2}});
    const auto q = ChargeVector::from_microcoulombs(Vector{1, -1});
    EXPECT_GT(coulomb_force_on(0, s, q)[0], 0.0);
    EXPECT_NEAR(coulomb_force_on(0, s, q)[0], 8.99e9 * 1e-12 / 4.0, 1e-16);
}

TEST(Formation, ZeroChargesGiveZeroForce) {
    const auto f = coulomb_forces(four_craft(), ChargeVector::zeros(4));
    EXPECT_EQ(f, Vector(8, 0.0));
}

TEST(Formation, CoincidentCraftAreSingular) {
    EXPECT_EQ(error_of([] { FormationState(2, {{1, 1}, {1, 1}}); }), ErrorCode::singular_geometry);
}

TEST(Formation, NonFinitePositionIsInvalid) {
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(error_of([&] { FormationState(2, {{0, 0}, {inf, 0}}); }), ErrorCode::invalid_formation);
}

TEST(Formation, SingleCraftIsInvalid) {
    EXPECT_EQ(error_of([] { FormationState(3, {{0, 0, 0}}); }), ErrorCode::invalid_formation);
}

TEST(Formation, WrongChargeLengthIsRejected) {
    EXPECT_EQ(error_of([] { coulomb_forces(four_craft(), ChargeVector::zeros(3)); }), ErrorCode::invalid_input);
}

TEST(Formation, RelativeMapShape) {
    const Matrix a = relative_coulomb_matrix(four_craft());
    EXPECT_EQ(a.rows(), 6u);
    EXPECT_EQ(a.cols(), 16u);
}

TEST(Formation, RelativeMapIgnoresDiagonal) {
    const Matrix a = relative_coulomb_matrix(four_craft());
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t r = 0; r < a.rows(); ++r) EXPECT_EQ(a(r, i + i * 4), 0.0);
}

TEST(Formation, TwoCraftRowMapBlocks) {
    // a₁ puts ½(x₁ − x₂)/r³ at vec indices of (0,1) and (1,0).
    const FormationState s(2, {{0, 0}, {3, 4}});
    const Matrix a1 = coulomb_row_map(0, s);
    const Vector g{-3.0 / 125.0, -4.0 / 125.0};
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(a1(k, 0), 0.0);
        EXPECT_NEAR(a1(k, 1), 0.5 * g[k], 1e-17);
        EXPECT_NEAR(a1(k, 2), 0.5 * g[k], 1e-17);
        EXPECT_EQ(a1(k, 3), 0.0);
    }
}

TEST(Formation, NewtonsThirdLaw) {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng.index(2, 6);
        const std::size_t d = rng.index(2, 3);
        const FormationState s = rng.formation(n, d);
        const ChargeVector q = rng.charges(n);
        const Vector f = coulomb_forces(s, q);
        double scale = 0.0;
        Vector net(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < d; ++k) net[k] += f[i * d + k];
            scale += norm(std::span<const double>(f.data() + i * d, d));
        }
        EXPECT_LE(norm(net), 1e-10 * scale);
    }
}

TEST(Formation, LinearMapMatchesPairwiseSum) {
    Rng rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng.index(2, 6);
        const std::size_t d = rng.index(2, 3);
        const FormationState s = rng.formation(n, d);
        const ChargeVector q = rng.charges(n);
        const RelativeForce pairwise = relative_coulomb_force(s, q);
        const RelativeForce lifted = relative_coulomb_force(relative_coulomb_matrix(s), q);
        EXPECT_LE(norm(pairwise.values - lifted.values), 1e-10 * std::max(pairwise.norm(), 1e-300));
    }
}

TEST(Formation, ForcesAreEvenInCharge) {
    Rng rng(13);
    const FormationState s = rng.formation(5, 3);
    const ChargeVector q = rng.charges(5);
    EXPECT_EQ(coulomb_forces(s, q), coulomb_forces(s, -q));
}

TEST(Formation, DoublingDistancesQuartersForces) {
    Rng rng(14);
    const FormationState s = rng.formation(4, 3);
    const ChargeVector q = rng.charges(4);
    const FormationState wide = FormationState::from_stacked(3, 2.0 * s.stacked());
    const Vector f = coulomb_forces(s, q);
    const Vector g = coulomb_forces(wide, q);
    EXPECT_LE(max_abs_diff(0.25 * f, g), 1e-15 * max_abs(f));
}

TEST(Formation, RelativeThrustDifferencesConsecutiveCraft) {
    const ThrustVector t{2, {1, 2, 4, 6, 5, 5}};
    EXPECT_EQ(relative_thrust(t).values, (Vector{3, 4, 1, -1}));
    EXPECT_NEAR(t.sum_of_norms(), std::sqrt(5.0) + std::sqrt(52.0) + std::sqrt(50.0), 1e-14);
}

TEST(Formation, RelativeThrustMatchesDifferenceMatrix) {
    Rng rng(15);
    const ThrustVector t{3, rng.vector(12, -1, 1)};
    EXPECT_LE(max_abs_diff(relative_thrust(t).values, difference_matrix(4, 3) * t.values), 1e-15);
}

TEST(Formation, MicrocoulombRoundTrip) {
    const auto q = ChargeVector::from_microcoulombs(Vector{3, -4});
    EXPECT_DOUBLE_EQ(q[0], 3e-6);
    EXPECT_DOUBLE_EQ(q.microcoulombs()[1], -4.0);
}
