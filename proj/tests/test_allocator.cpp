#include <gtest/gtest.h>

#include "coulomb/allocator.hpp"
#include "support.hpp"

using namespace coulomb;
using coulomb::testing::max_abs_diff;
using coulomb::testing::Rng;

namespace {

FormationState four_craft() { return FormationState(2, {{0, 0}, {10, 0}, {5, 7}, {-10, 2}}); }
const RelativeForce kFourCraftCommand{{-0.023, -0.067, -0.069, -0.211, -0.037, 0.1806}};

SymMatrix gram_of(const ChargeVector& q) {
    Matrix m = Matrix::outer(q.values, q.values);
    m *= kCoulombConstant;
    return SymMatrix(m);
}

double command_mismatch(const FormationState& s, const RelativeForce& f, const AllocationResult& r) {
    const Vector achieved = relative_thrust(r.thrusts).values + relative_coulomb_force(s, r.charges).values;
    return norm(achieved - f.values);
}

}  // namespace

TEST(Allocator, ExtractsKnownChargePair) {
    const auto q = ChargeVector::from_microcoulombs(Vector{3, -4});
    const ChargeVector back = extract_charges(gram_of(q));
    // Largest magnitude entry is made positive: (3, −4) → (−3, 4).
    EXPECT_NEAR(back[0], -3e-6, 1e-16);
    EXPECT_NEAR(back[1], 4e-6, 1e-16);
}

TEST(Allocator, RankOneRoundTrip) {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng.index(2, 6);
        const ChargeVector q = rng.charges(n, 300.0);
        const ChargeVector back = extract_charges(gram_of(q));
        const double sign = dot(back.values, q.values) >= 0.0 ? 1.0 : -1.0;
        EXPECT_LE(norm(back.values - sign * q.values), 1e-10 * norm(q.values));
    }
}

TEST(Allocator, ZeroGramGivesZeroCharges) {
    EXPECT_EQ(extract_charges(SymMatrix(3)).values, Vector(3, 0.0));
}

TEST(Allocator, IndefiniteGramIsRejected) {
    try {
        extract_charges(SymMatrix(Matrix{{1, 0}, {0, -1}}));
        FAIL() << "expected invalid_input";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_input);
    }
}

TEST(Allocator, CanonicalSignFavorsLargestEntry) {
    EXPECT_EQ(canonical_sign(ChargeVector{{1, -2, 0.5}}).values, (Vector{-1, 2, -0.5}));
    EXPECT_EQ(canonical_sign(ChargeVector{{-2, 2}}).values, (Vector{2, -2}));
}

TEST(Allocator, ThrustCompletionSatisfiesCommand) {
    const FormationState s = four_craft();
    const auto q = ChargeVector::from_microcoulombs(Vector{10, -20, 5, 7});
    const ThrustVector t = complete_thrust(s, kFourCraftCommand, q);
    const Vector achieved = relative_thrust(t).values + relative_coulomb_force(s, q).values;
    EXPECT_LE(max_abs_diff(achieved, kFourCraftCommand.values), 1e-15);
}

TEST(Allocator, PercentErrorOfZeroChargesIsHundred) {
    EXPECT_DOUBLE_EQ(percent_error(four_craft(), ChargeVector::zeros(4), kFourCraftCommand), 100.0);
}

TEST(Allocator, PercentErrorOfZeroCommandIsUndefined) {
    try {
        percent_error(four_craft(), ChargeVector::zeros(4), RelativeForce{Vector(6, 0.0)});
        FAIL() << "expected undefined_metric";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::undefined_metric);
    }
}

TEST(Allocator, SearchSetValidation) {
    EXPECT_THROW(EpsilonSearchSet({}, 1.0), Error);
    EXPECT_THROW(EpsilonSearchSet({0.2, 0.1}, 1.0), Error);
    EXPECT_THROW(EpsilonSearchSet({0.1, 1.0}, 1.0), Error);
    EXPECT_THROW(EpsilonSearchSet({-0.1}, 1.0), Error);
    EXPECT_NO_THROW(EpsilonSearchSet({0.0, 0.5}, 1.0));
}

TEST(Allocator, LinearSearchSetSpansFractions) {
    const auto set = EpsilonSearchSet::linear(2.0, 5, 0.1, 0.9);
    ASSERT_EQ(set.size(), 5u);
    EXPECT_DOUBLE_EQ(set.values().front(), 0.2);
    EXPECT_DOUBLE_EQ(set.values().back(), 1.8);
}

TEST(Allocator, ExplicitSpecDropsValuesBeyondCommandNorm) {
    const auto spec = EpsilonSpec::explicit_list({0.3, 0.1, 5.0, 0.1});
    const auto set = spec.resolve(1.0);
    ASSERT_TRUE(set.has_value());
    EXPECT_EQ(set->values(), (Vector{0.1, 0.3}));
    EXPECT_FALSE(EpsilonSpec::explicit_list({2.0}).resolve(1.0).has_value());
}

TEST(Allocator, FourCraftPicksFivePercentOfNewton) {
    const auto r = allocate(four_craft(), kFourCraftCommand, EpsilonSpec::explicit_list({0.05, 0.10, 0.15, 0.20, 0.25}));
    ASSERT_TRUE(r.chosen_epsilon.has_value());
    EXPECT_DOUBLE_EQ(*r.chosen_epsilon, 0.05);
    const Vector expected{36.613, 19.557, -27.080, 16.255};
    const Vector got = r.charges.microcoulombs();
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(got[i], expected[i], 5e-3);
    EXPECT_NEAR(r.thrusts.sum_of_norms(), 0.0784, 5e-4);
    EXPECT_NEAR(r.propellant_thruster_only, 0.4236, 5e-4);
    EXPECT_FALSE(r.solver_fallback);
    EXPECT_EQ(r.diagnostics.size(), 5u);
}

TEST(Allocator, FourCraftPercentErrorBottomsOutAtFivePercentOfNewton) {
    const AllocationContext ctx(four_craft(), kFourCraftCommand);
    double best = 1e300, best_eps = -1.0;
    for (int k = 6; k <= 118; ++k) {
        const double eps = 0.0025 * k;
        const EpsilonDiagnostic d = ctx.evaluate(eps, {});
        if (d.status != SdpStatus::optimal) continue;
        if (d.percent_error < best) {
            best = d.percent_error;
            best_eps = eps;
        }
    }
    EXPECT_NEAR(best_eps, 0.05, 1e-12);
    EXPECT_NEAR(best, 18.39, 0.01);
}

TEST(Allocator, CommandIsSatisfiedExactly) {
    Rng rng(32);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = rng.index(2, 4);
        const std::size_t d = rng.index(2, 3);
        const FormationState s = rng.formation(n, d, 60.0, 5.0);
        RelativeForce f{rng.vector(d * (n - 1), -0.5, 0.5)};
        if (trial % 2 == 0) f = relative_coulomb_force(s, rng.charges(n, 200.0));
        EpsilonSpec spec;
        spec.count = 6;
        const auto r = allocate(s, f, spec);
        EXPECT_LE(command_mismatch(s, f, r), 1e-9 * std::max(1.0, f.norm()));
        EXPECT_LE(r.thrust_norm, thruster_only_result(AllocationContext(s, f)).thrust_norm);
    }
    const auto r = allocate(four_craft(), kFourCraftCommand, EpsilonSpec{});
    EXPECT_LE(command_mismatch(four_craft(), kFourCraftCommand, r), 1e-9);
}

TEST(Allocator, NeverWorseThanThrustersAlone) {
    const auto r = allocate(four_craft(), kFourCraftCommand, EpsilonSpec{});
    const auto baseline = thruster_only_result(AllocationContext(four_craft(), kFourCraftCommand));
    EXPECT_LE(r.thrust_norm, baseline.thrust_norm);
    for (const auto& d : r.diagnostics)
        if (d.status == SdpStatus::optimal) {
            EXPECT_GE(d.thrust_norm, r.thrust_norm);
        }
}

TEST(Allocator, PerpendicularCommandOnTwoCraftUsesNoCharge) {
    // The pair force is along the line of sight, so a perpendicular command is
    // outside range A for every ε < ‖f‖.
    const FormationState s(2, {{0, 0}, {10, 0}});
    const RelativeForce f{{0.0, 0.1}};
    const auto r = allocate(s, f, EpsilonSpec{});
    EXPECT_EQ(r.charges.values, Vector(2, 0.0));
    EXPECT_FALSE(r.chosen_epsilon.has_value());
    EXPECT_FALSE(r.solver_fallback);
    EXPECT_LE(max_abs_diff(r.thrusts.values, Vector{0, -0.05, 0, 0.05}), 1e-15);
}

TEST(Allocator, NearlyFullTolerance) {
    const double eps = 0.999 * kFourCraftCommand.norm();
    const auto r = allocate(four_craft(), kFourCraftCommand, EpsilonSpec::explicit_list({eps}));
    const auto baseline = thruster_only_result(AllocationContext(four_craft(), kFourCraftCommand));
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].status, SdpStatus::optimal);
    EXPECT_LT(r.diagnostics[0].trace, 0.05);
    EXPECT_LE(r.thrust_norm, baseline.thrust_norm);
}

TEST(Allocator, ZeroCommandNeedsNothing) {
    const auto r = allocate(four_craft(), RelativeForce{Vector(6, 0.0)}, EpsilonSpec{});
    EXPECT_EQ(r.charges.values, Vector(4, 0.0));
    EXPECT_EQ(r.thrusts.values, Vector(8, 0.0));
    EXPECT_FALSE(r.percent_error.has_value());
    EXPECT_FALSE(r.reduction_percent().has_value());
    EXPECT_FALSE(r.solver_fallback);
}

TEST(Allocator, Deterministic) {
    const auto a = allocate(four_craft(), kFourCraftCommand, EpsilonSpec{});
    const auto b = allocate(four_craft(), kFourCraftCommand, EpsilonSpec{});
    EXPECT_EQ(a.charges.values, b.charges.values);
    EXPECT_EQ(a.thrusts.values, b.thrusts.values);
    EXPECT_EQ(a.chosen_epsilon, b.chosen_epsilon);
}

TEST(Allocator, WrongCommandLengthIsRejected) {
    EXPECT_THROW(allocate(four_craft(), RelativeForce{Vector(5, 0.1)}, EpsilonSpec{}), Error);
}
