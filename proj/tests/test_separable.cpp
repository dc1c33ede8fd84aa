#include "qrsp/separable.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qrsp::separable;
using qrsp::linalg::Complex;
using qrsp::linalg::Matrix;
using qrsp::linalg::StateVector;
using qrsp::linalg::kExactTol;
using qrsp::states::QuditSpec;

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

std::vector<double> random_real_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> g;
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& x : v) {
            x = g(rng);
            n2 += x * x;
        }
    } while (n2 < 1e-6);
    const double n = std::sqrt(n2);
    for (auto& x : v) x /= n;
    return v;
}

StateVector real_state(const std::vector<double>& v) {
    std::vector<Complex> a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = v[i];
    return StateVector(std::move(a));
}

StateVector random_real_state(std::mt19937_64& rng, std::size_t dim) {
    return real_state(random_real_unit(rng, dim));
}

StateVector bell_pair() { return real_state({kInvSqrt2, 0, 0, kInvSqrt2}); }

StateVector ghz(std::size_t qubits) {
    std::vector<double> v(std::size_t{1} << qubits, 0.0);
    v.front() = kInvSqrt2;
    v.back() = kInvSqrt2;
    return real_state(v);
}

// An explicitly entangled two-qubit real state with Schmidt angle theta.
StateVector schmidt_pair(double theta) {
    return real_state({std::cos(theta), 0, 0, std::sin(theta)});
}

QuditSpec spec_from_state(const StateVector& v) {
    std::vector<double> coeffs(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) coeffs[i] = v[i].real();
    return qrsp::states::real_spec(v.dim(), coeffs);
}

}  // namespace

TEST(Grouping, ValidationRules) {
    EXPECT_NO_THROW(validate_grouping(grouping_from_sizes({2, 2}), 4));
    EXPECT_NO_THROW(validate_grouping(grouping_from_sizes({1, 3}), 4));
    EXPECT_THROW(validate_grouping(grouping_from_sizes({2, 2}), 5), std::invalid_argument);
    EXPECT_THROW(validate_grouping(grouping_from_sizes({4}), 4), std::invalid_argument);
    EXPECT_THROW(validate_grouping(GroupingSpec{{{0}, {2}}}, 2), std::invalid_argument);
    EXPECT_THROW(validate_grouping(GroupingSpec{}, 2), std::invalid_argument);
}

TEST(Grouping, FixedPolicies) {
    const auto singles = allowed_groupings(5, GroupingPolicy::singletons);
    ASSERT_EQ(singles.size(), 1u);
    EXPECT_EQ(singles[0].parties.size(), 5u);

    const auto pairs_even = allowed_groupings(4, GroupingPolicy::pairs);
    ASSERT_EQ(pairs_even[0].parties.size(), 2u);
    EXPECT_EQ(pairs_even[0].parties[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(pairs_even[0].parties[1], (std::vector<std::size_t>{2, 3}));

    const auto pairs_odd = allowed_groupings(5, GroupingPolicy::pairs);
    ASSERT_EQ(pairs_odd[0].parties.size(), 3u);
    EXPECT_EQ(pairs_odd[0].parties[2], (std::vector<std::size_t>{4}));

    const auto triples = allowed_groupings(7, GroupingPolicy::triples);
    ASSERT_EQ(triples[0].parties.size(), 3u);
    EXPECT_EQ(triples[0].parties[2], (std::vector<std::size_t>{6}));

    const auto triples5 = allowed_groupings(5, GroupingPolicy::triples);
    EXPECT_EQ(triples5[0].parties[1], (std::vector<std::size_t>{3, 4}));
}

TEST(Grouping, EnumerationOrderAndCounts) {
    const auto g3 = allowed_groupings(3, GroupingPolicy::enumerate_contiguous);
    ASSERT_EQ(g3.size(), 4u);
    EXPECT_EQ(g3[0].parties.size(), 3u);  // (1,1,1)
    EXPECT_EQ(g3[1].parties[0].size(), 1u);  // (1,2)
    EXPECT_EQ(g3[1].parties[1].size(), 2u);
    EXPECT_EQ(g3[2].parties[0].size(), 2u);  // (2,1)
    EXPECT_EQ(g3[3].parties[0].size(), 3u);  // (3)

    EXPECT_EQ(allowed_groupings(1, GroupingPolicy::enumerate_contiguous).size(), 1u);
    EXPECT_EQ(allowed_groupings(2, GroupingPolicy::enumerate_contiguous).size(), 2u);
    EXPECT_EQ(allowed_groupings(4, GroupingPolicy::enumerate_contiguous).size(), 7u);
    EXPECT_EQ(allowed_groupings(5, GroupingPolicy::enumerate_contiguous).size(), 13u);
    EXPECT_EQ(allowed_groupings(6, GroupingPolicy::enumerate_contiguous).size(), 24u);
}

TEST(Measure, ProductStatesScoreZero) {
    std::mt19937_64 rng(401);
    for (int rep = 0; rep < 20; ++rep) {
        StateVector v = random_real_state(rng, 2);
        v = tensor(v, random_real_state(rng, 2));
        v = tensor(v, random_real_state(rng, 2));
        EXPECT_LE(separability_measure(v, grouping_from_sizes({1, 1, 1})), 1e-10);
        EXPECT_LE(separability_measure(v, grouping_from_sizes({2, 1})), 1e-10);
        EXPECT_LE(separability_measure(v, grouping_from_sizes({3})), 1e-10);
    }
}

TEST(Measure, BellPairScoresSqrt2) {
    EXPECT_NEAR(separability_measure(bell_pair(), grouping_from_sizes({1, 1})), std::sqrt(2.0),
                1e-10);
}

TEST(Measure, GhzThreeScoresSqrt3) {
    EXPECT_NEAR(separability_measure(ghz(3), grouping_from_sizes({1, 1, 1})), std::sqrt(3.0),
                1e-10);
}

TEST(Measure, SingletonZeroIffEveryQubitPure) {
    // One entangled pair in a 3-qubit state: exactly the entangled qubits
    // have purity < 1 and the measure is strictly positive.
    std::mt19937_64 rng(409);
    const StateVector v = tensor(schmidt_pair(0.7), random_real_state(rng, 2));
    for (std::size_t slot : {0u, 1u}) {
        EXPECT_LT(qrsp::linalg::purity(qrsp::linalg::reduced_density(v, {slot}, 3)), 1.0 - 1e-3);
    }
    EXPECT_NEAR(qrsp::linalg::purity(qrsp::linalg::reduced_density(v, {2}, 3)), 1.0, 1e-10);
    EXPECT_GT(separability_measure(v, grouping_from_sizes({1, 1, 1})), 1e-3);

    const StateVector product = tensor(tensor(random_real_state(rng, 2), random_real_state(rng, 2)),
                                       random_real_state(rng, 2));
    for (std::size_t slot : {0u, 1u, 2u}) {
        EXPECT_NEAR(qrsp::linalg::purity(qrsp::linalg::reduced_density(product, {slot}, 3)), 1.0,
                    1e-10);
    }
    EXPECT_LE(separability_measure(product, grouping_from_sizes({1, 1, 1})), 1e-10);
}

TEST(ExtractFactors, PinnedSingletonExample) {
    const StateVector v = real_state({kInvSqrt2, kInvSqrt2, 0, 0});  // |0> (x) |+>
    const auto factors = extract_factors(v, grouping_from_sizes({1, 1}));
    ASSERT_EQ(factors.size(), 2u);
    EXPECT_NEAR(std::abs(factors[0][0] - Complex{1.0}), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(factors[0][1]), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(factors[1][0] - Complex{kInvSqrt2}), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(factors[1][1] - Complex{kInvSqrt2}), 0.0, 1e-8);
}

TEST(ExtractFactors, PairGroupingReconstructsFourLevelFactors) {
    std::mt19937_64 rng(419);
    const StateVector f1 = random_real_state(rng, 4);
    const StateVector f2 = random_real_state(rng, 4);
    const StateVector v = tensor(f1, f2);
    const auto g = grouping_from_sizes({2, 2});
    const auto factors = extract_factors(v, g);
    ASSERT_EQ(factors.size(), 2u);
    EXPECT_GE(qrsp::linalg::fidelity_global_phase(factors[0], f1), 1.0 - 1e-8);
    EXPECT_GE(qrsp::linalg::fidelity_global_phase(factors[1], f2), 1.0 - 1e-8);
    const StateVector rebuilt = tensor(factors[0], factors[1]);
    EXPECT_GE(qrsp::linalg::fidelity_global_phase(rebuilt, v), 1.0 - 1e-8);
    for (const auto& f : factors) {
        EXPECT_NEAR(f.norm_sq(), 1.0, 1e-10);
        double n2 = 0.0;
        for (std::size_t i = 0; i < 4; ++i) n2 += std::norm(f[i]);
        EXPECT_NEAR(n2, 1.0, 1e-10);
    }
}

TEST(ExtractFactors, RefusesEntangledStates) {
    EXPECT_THROW(extract_factors(bell_pair(), grouping_from_sizes({1, 1})), std::invalid_argument);
}

TEST(Analyze, ReportsBothOutcomes) {
    const auto yes = analyze(real_state({1, 0, 0, 0}), grouping_from_sizes({1, 1}));
    EXPECT_TRUE(yes.separable);
    EXPECT_LE(yes.measure, 1e-10);
    EXPECT_EQ(yes.factors.size(), 2u);

    const auto no = analyze(bell_pair(), grouping_from_sizes({1, 1}));
    EXPECT_FALSE(no.separable);
    EXPECT_NEAR(no.measure, std::sqrt(2.0), 1e-10);
    EXPECT_TRUE(no.factors.empty());
}

TEST(PlanGrouping, FindsTheGeneratingStructure) {
    std::mt19937_64 rng(421);
    // Four product qubits: singletons succeed.
    StateVector prod = random_real_state(rng, 2);
    for (int i = 0; i < 3; ++i) prod = tensor(prod, random_real_state(rng, 2));
    const auto g1 = plan_grouping(prod, GroupingPolicy::singletons);
    ASSERT_TRUE(g1.has_value());
    EXPECT_EQ(g1->parties.size(), 4u);

    // Two entangled pairs: singletons fail, pair grouping succeeds.
    const StateVector pairs = tensor(schmidt_pair(0.6), schmidt_pair(1.1));
    EXPECT_FALSE(plan_grouping(pairs, GroupingPolicy::singletons).has_value());
    const auto g2 = plan_grouping(pairs, GroupingPolicy::pairs);
    ASSERT_TRUE(g2.has_value());
    EXPECT_EQ(g2->parties[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(g2->parties[1], (std::vector<std::size_t>{2, 3}));

    // GHZ on three qubits: only the single size-3 party works.
    const auto g3 = plan_grouping(ghz(3), GroupingPolicy::enumerate_contiguous);
    ASSERT_TRUE(g3.has_value());
    ASSERT_EQ(g3->parties.size(), 1u);
    EXPECT_EQ(g3->parties[0], (std::vector<std::size_t>{0, 1, 2}));

    // GHZ on four qubits: nothing fits within parties of size <= 3.
    EXPECT_FALSE(plan_grouping(ghz(4), GroupingPolicy::enumerate_contiguous).has_value());
}

TEST(UsCatalog, IdentityAndPermutations) {
    const auto id = identity_catalog(2);
    ASSERT_EQ(id.entries.size(), 1u);
    EXPECT_NEAR(max_abs_diff(id.entries[0], Matrix::identity(4)), 0.0, kExactTol);

    const auto perms = slot_permutation_catalog(3);
    EXPECT_EQ(perms.entries.size(), 6u);
    EXPECT_NEAR(max_abs_diff(perms.entries[0], Matrix::identity(8)), 0.0, kExactTol);

    const StateVector v = ghz(3);
    EXPECT_LE(max_abs_diff(apply_us(v, perms, 0), v), kExactTol);
    EXPECT_THROW(apply_us(v, perms, 6), std::invalid_argument);
}

TEST(UsCatalog, PermutationRescuesAPairGrouping) {
    // Entangled pair on slots {0,2}, product qubits on slots {1,3}.
    std::mt19937_64 rng(431);
    const StateVector e = schmidt_pair(0.8);
    const auto u1 = random_real_unit(rng, 2);
    const auto u3 = random_real_unit(rng, 2);
    std::vector<Complex> amps(16);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t d = 0; d < 2; ++d) {
                    amps[(a << 3) | (b << 2) | (c << 1) | d] = e[(a << 1) | c] * u1[b] * u3[d];
                }
    const StateVector v{std::move(amps)};

    const auto pair_grouping = grouping_from_sizes({2, 2});
    EXPECT_GT(separability_measure(v, pair_grouping), 1e-3);
    const StateVector swapped =
        qrsp::linalg::apply(qrsp::linalg::slot_permutation({0, 2, 1, 3}), v);
    EXPECT_LE(separability_measure(swapped, pair_grouping), 1e-10);

    EXPECT_FALSE(plan_separable(v, GroupingPolicy::pairs, identity_catalog(4)).has_value());
    const auto plan = plan_separable(v, GroupingPolicy::pairs, slot_permutation_catalog(4));
    ASSERT_TRUE(plan.has_value());
    EXPECT_GT(plan->us_index, 0u);
    EXPECT_LE(plan->measure, 1e-8);
}

TEST(CaseOneScheme, ProjectorCompletenessAndCorrection) {
    std::mt19937_64 rng(433);
    const auto psi = random_real_unit(rng, 2);
    const double a = psi[0], b = psi[1];
    // The two basis states {psi, psi_bar}.
    const Matrix proj0(2, 2, {a * a, a * b, a * b, b * b});
    const Matrix proj1(2, 2, {b * b, -a * b, -a * b, a * a});
    Matrix sum(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) sum(i, j) = proj0(i, j) + proj1(i, j);
    EXPECT_NEAR(max_abs_diff(sum, Matrix::identity(2)), 0.0, 1e-12);

    // Bob's quarter turn maps psi_bar = (b, -a) to psi = (a, b).
    const StateVector bar = real_state({b, -a});
    const StateVector fixed = qrsp::linalg::apply(Matrix(2, 2, {0, -1, 1, 0}), bar);
    EXPECT_LE(max_abs_diff(fixed, real_state({a, b})), 1e-12);
}

TEST(RunExhaustive, ProductOfQubitsUnderSingletons) {
    std::mt19937_64 rng(439);
    StateVector v = random_real_state(rng, 2);
    for (int i = 0; i < 3; ++i) v = tensor(v, random_real_state(rng, 2));
    const QuditSpec q = spec_from_state(v);

    const auto table =
        run_separable_exhaustive(q, 4, GroupingPolicy::singletons, identity_catalog(4));
    EXPECT_EQ(table.pairs, 4u);
    ASSERT_EQ(table.branches.size(), 16u);
    EXPECT_NEAR(table.success_prob(), 1.0, 1e-12);
    EXPECT_NEAR(table.cbits_per_run(), 4.0, kExactTol);
    for (const auto& br : table.branches) {
        EXPECT_NEAR(br.prob, 1.0 / 16.0, 1e-12);
        EXPECT_GE(br.fidelity, 1.0 - 1e-8);
    }
}

TEST(RunExhaustive, EntangledPairsUnderPairPolicy) {
    const StateVector v = tensor(schmidt_pair(0.6), schmidt_pair(1.2));
    const QuditSpec q = spec_from_state(v);
    const auto table = run_separable_exhaustive(q, 4, GroupingPolicy::pairs, identity_catalog(4));
    EXPECT_NEAR(table.success_prob(), 1.0, 1e-12);
    EXPECT_NEAR(table.cbits_per_run(), 4.0, kExactTol);
}

TEST(RunExhaustive, EntangledTripleUnderTriplePolicy) {
    const QuditSpec q = spec_from_state(ghz(3));
    const auto table = run_separable_exhaustive(q, 3, GroupingPolicy::triples, identity_catalog(3));
    EXPECT_NEAR(table.success_prob(), 1.0, 1e-12);
    EXPECT_NEAR(table.cbits_per_run(), 3.0, kExactTol);
    ASSERT_EQ(table.branches.size(), 8u);
    for (const auto& br : table.branches) EXPECT_NEAR(br.prob, 0.125, 1e-12);
}

TEST(RunExhaustive, QubitTimesGhzNeedsTheEnumeratingPolicy) {
    std::mt19937_64 rng(443);
    const StateVector v = tensor(random_real_state(rng, 2), ghz(3));
    const QuditSpec q = spec_from_state(v);

    EXPECT_THROW(run_separable_exhaustive(q, 4, GroupingPolicy::singletons, identity_catalog(4)),
                 NotPreparableError);
    const auto table = run_separable_exhaustive(q, 4, GroupingPolicy::enumerate_contiguous,
                                                identity_catalog(4));
    EXPECT_NEAR(table.success_prob(), 1.0, 1e-12);
    // L bits plus the announcement of one grouping among the 7 contiguous
    // partitions of 4 into parts <= 3.
    EXPECT_NEAR(table.cbits_per_run(), 4.0 + std::log2(7.0), 1e-12);
}

TEST(RunExhaustive, ZeroPaddedNineLevelTarget) {
    // A 9-level target whose nonzero amplitudes sit at indices 0 and 8
    // embeds into 4 qubits as (a|0> + b|1>) (x) |000>.
    const double a = std::cos(0.3), b = std::sin(0.3);
    std::vector<double> coeffs(9, 0.0);
    coeffs[0] = a;
    coeffs[8] = b;
    const QuditSpec q = qrsp::states::real_spec(9, coeffs);
    const auto table = run_separable_exhaustive(q, 4, GroupingPolicy::enumerate_contiguous,
                                                identity_catalog(4));
    EXPECT_NEAR(table.success_prob(), 1.0, 1e-12);
    EXPECT_NEAR(table.cbits_per_run(), 4.0 + std::log2(7.0), 1e-12);
    // Bob's state matches the 9-level spec on the canonical subspace.
    std::vector<std::size_t> canonical(9);
    std::iota(canonical.begin(), canonical.end(), 0);
    for (const auto& br : table.branches) {
        EXPECT_TRUE(qrsp::states::equivalent(br.bob_final, canonical, q));
    }
}

TEST(RunExhaustive, PermutationCatalogChargesItsAnnouncement) {
    std::mt19937_64 rng(449);
    const StateVector e = schmidt_pair(0.8);
    const auto u1 = random_real_unit(rng, 2);
    const auto u3 = random_real_unit(rng, 2);
    std::vector<Complex> amps(16);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t d = 0; d < 2; ++d) {
                    amps[(a << 3) | (b << 2) | (c << 1) | d] = e[(a << 1) | c] * u1[b] * u3[d];
                }
    const QuditSpec q = spec_from_state(StateVector{std::move(amps)});

    const auto table = run_separable_exhaustive(q, 4, GroupingPolicy::pairs,
                                                slot_permutation_catalog(4));
    EXPECT_NEAR(table.success_prob(), 1.0, 1e-12);
    EXPECT_NEAR(table.cbits_per_run(), 4.0 + std::log2(24.0), 1e-12);
}

TEST(RunExhaustive, RejectsBadInputs) {
    const QuditSpec complex_q = qrsp::states::general_spec(
        4, {0.5, 0.5, 0.5, 0.0}, {0.0, 0.0, 0.0, 0.5});
    EXPECT_THROW(
        run_separable_exhaustive(complex_q, 2, GroupingPolicy::singletons, identity_catalog(2)),
        std::invalid_argument);

    const QuditSpec q = spec_from_state(ghz(4));
    EXPECT_THROW(run_separable_exhaustive(q, 4, GroupingPolicy::enumerate_contiguous,
                                          identity_catalog(4)),
                 NotPreparableError);
    EXPECT_THROW(run_separable_exhaustive(q, 9, GroupingPolicy::singletons, identity_catalog(9)),
                 std::invalid_argument);
}

TEST(RunSampled, MessageStructureAndDeterminism) {
    std::mt19937_64 rng(457);
    const StateVector v = tensor(random_real_state(rng, 2), ghz(3));
    const QuditSpec q = spec_from_state(v);

    const auto a = run_separable_sampled(q, 4, GroupingPolicy::enumerate_contiguous,
                                         identity_catalog(4), 31);
    const auto b = run_separable_sampled(q, 4, GroupingPolicy::enumerate_contiguous,
                                         identity_catalog(4), 31);
    EXPECT_EQ(a.alice_outcome, b.alice_outcome);
    EXPECT_TRUE(a.success);
    EXPECT_GE(a.fidelity, 1.0 - 1e-8);
    // Messages: grouping announcement (alphabet 7), then the two party
    // outcomes (alphabets 2 and 8 for the 1+3 split).
    ASSERT_EQ(a.messages.size(), 3u);
    EXPECT_EQ(a.messages[0].alphabet_size, 7u);
    EXPECT_EQ(a.messages[1].alphabet_size, 2u);
    EXPECT_EQ(a.messages[2].alphabet_size, 8u);
    EXPECT_NEAR(a.cbits_total, 4.0 + std::log2(7.0), 1e-12);
}

TEST(RunSampled, IntegerModeRoundsAnnouncements) {
    std::mt19937_64 rng(461);
    const StateVector v = tensor(random_real_state(rng, 2), ghz(3));
    const QuditSpec q = spec_from_state(v);
    const auto t = run_separable_sampled(q, 4, GroupingPolicy::enumerate_contiguous,
                                         identity_catalog(4), 5, CbitMode::integer);
    EXPECT_NEAR(t.cbits_total, 4.0 + 3.0, kExactTol);  // ceil(log2 7) = 3
}

TEST(RoundTrip, RandomFactorsAcrossMixedPartySizes) {
    std::mt19937_64 rng(463);
    const std::vector<std::vector<std::size_t>> layouts{
        {1, 2}, {2, 1}, {3, 1}, {1, 3}, {2, 2}, {1, 1, 2}, {3, 2}, {2, 3}};
    for (const auto& layout : layouts) {
        StateVector v = random_real_state(rng, std::size_t{1} << layout[0]);
        for (std::size_t p = 1; p < layout.size(); ++p) {
            v = tensor(v, random_real_state(rng, std::size_t{1} << layout[p]));
        }
        const auto g = plan_grouping(v, GroupingPolicy::enumerate_contiguous);
        ASSERT_TRUE(g.has_value());
        const auto factors = extract_factors(v, *g);
        StateVector rebuilt = factors[0];
        for (std::size_t p = 1; p < factors.size(); ++p) rebuilt = tensor(rebuilt, factors[p]);
        EXPECT_GE(qrsp::linalg::fidelity_global_phase(rebuilt, v), 1.0 - 1e-8);
    }
}
