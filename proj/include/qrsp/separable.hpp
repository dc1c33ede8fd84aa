// Full separability of an embedded L-qubit target and the composed RSP it
// enables: split the qubits into contiguous parties of size at most 3,
// check the separability measure sqrt(2 sum_r (1 - tr rho_r^2)), extract
// the per-party factors, and prepare each factor with its own deterministic
// sub-protocol (two-outcome projective scheme for single qubits, the
// dimension-4 / dimension-8 operator catalogs for pairs and triples).
//
// An optional pre-transformation U_s from a registered catalog may be
// applied to make the target separable; Alice announces its index (and,
// under the enumerating policy, the grouping index), which is what the
// extra classical bits pay for.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrsp/channel.hpp"
#include "qrsp/linalg.hpp"
#include "qrsp/realspace.hpp"
#include "qrsp/states.hpp"

namespace qrsp::separable {

using channel::BranchTable;
using channel::CbitMode;
using channel::ProtocolBranch;
using channel::ProtocolTranscript;
using linalg::Complex;
using linalg::DensityMatrix;
using linalg::Matrix;
using linalg::StateVector;

/// A state counts as separable when the measure falls at or below this.
inline constexpr double kSeparableTol = 1e-8;

/// Thrown when no allowed grouping (after every registered U_s) renders the
/// target separable.
class NotPreparableError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Groupings
// ---------------------------------------------------------------------------

/// Ordered, contiguous, disjoint slot blocks covering {0..L-1}, each of
/// size 1, 2 or 3.
struct GroupingSpec {
    std::vector<std::vector<std::size_t>> parties;
};

inline void validate_grouping(const GroupingSpec& g, std::size_t total_qubits) {
    std::size_t next = 0;
    if (g.parties.empty()) throw std::invalid_argument("grouping has no parties");
    for (const auto& party : g.parties) {
        if (party.empty() || party.size() > 3) {
            throw std::invalid_argument("party sizes must be 1, 2 or 3");
        }
        for (std::size_t slot : party) {
            if (slot != next) {
                throw std::invalid_argument("parties must be contiguous ascending slot blocks");
            }
            ++next;
        }
    }
    if (next != total_qubits) throw std::invalid_argument("grouping does not cover all slots");
}

inline GroupingSpec grouping_from_sizes(const std::vector<std::size_t>& sizes) {
    GroupingSpec g;
    std::size_t next = 0;
    for (std::size_t size : sizes) {
        std::vector<std::size_t> party(size);
        std::iota(party.begin(), party.end(), next);
        next += size;
        g.parties.push_back(std::move(party));
    }
    return g;
}

enum class GroupingPolicy { singletons, pairs, triples, enumerate_contiguous };

inline std::string policy_name(GroupingPolicy p) {
    switch (p) {
        case GroupingPolicy::singletons: return "singletons";
        case GroupingPolicy::pairs: return "pairs";
        case GroupingPolicy::triples: return "triples";
        case GroupingPolicy::enumerate_contiguous: return "enumerate";
    }
    throw std::logic_error("unreachable");
}

namespace detail {

// All compositions of L into parts <= 3, in ascending lexicographic order:
// (1,1,1) < (1,2) < (2,1) < (3). This is the canonical enumeration order.
inline std::vector<std::vector<std::size_t>> compositions_max3(std::size_t total) {
    if (total == 0) return {{}};
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t first = 1; first <= std::min<std::size_t>(3, total); ++first) {
        for (const auto& rest : compositions_max3(total - first)) {
            std::vector<std::size_t> comp{first};
            comp.insert(comp.end(), rest.begin(), rest.end());
            out.push_back(std::move(comp));
        }
    }
    return out;
}

}  // namespace detail

/// The groupings a policy admits, in the order the planner tries them.
/// Fixed policies admit exactly one: singletons, consecutive pairs with a
/// trailing singleton for odd L, or consecutive triples with a trailing
/// remainder party. The enumerating policy admits every contiguous
/// composition into parts of size <= 3.
inline std::vector<GroupingSpec> allowed_groupings(std::size_t total_qubits, GroupingPolicy p) {
    if (total_qubits == 0) throw std::invalid_argument("qubit count must be positive");
    std::vector<GroupingSpec> out;
    switch (p) {
        case GroupingPolicy::singletons: {
            out.push_back(grouping_from_sizes(std::vector<std::size_t>(total_qubits, 1)));
            break;
        }
        case GroupingPolicy::pairs: {
            std::vector<std::size_t> sizes(total_qubits / 2, 2);
            if (total_qubits % 2 != 0) sizes.push_back(1);
            out.push_back(grouping_from_sizes(sizes));
            break;
        }
        case GroupingPolicy::triples: {
            std::vector<std::size_t> sizes(total_qubits / 3, 3);
            if (total_qubits % 3 != 0) sizes.push_back(total_qubits % 3);
            out.push_back(grouping_from_sizes(sizes));
            break;
        }
        case GroupingPolicy::enumerate_contiguous: {
            for (const auto& sizes : detail::compositions_max3(total_qubits)) {
                out.push_back(grouping_from_sizes(sizes));
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Separability measure and factor extraction
// ---------------------------------------------------------------------------

/// sqrt(2 sum_r (1 - tr rho_r^2)) over the parties; zero exactly when the
/// state is a product across the grouping.
inline double separability_measure(const StateVector& v, const GroupingSpec& g) {
    const std::size_t total = linalg::log2_exact(v.dim());
    validate_grouping(g, total);
    double acc = 0.0;
    for (const auto& party : g.parties) {
        acc += linalg::purity_deficit(v, party, total);
    }
    return std::sqrt(2.0 * std::max(0.0, acc));
}

namespace detail {

// Dominant eigenvector by power iteration. The callers only ever face
// nearly-pure reduced matrices (top eigenvalue within 1e-8 of 1), where the
// spectral gap makes convergence immediate; the Rayleigh-quotient guard in
// extract_factors rejects anything else.
inline StateVector dominant_eigenvector(const DensityMatrix& rho) {
    const std::size_t n = rho.dim();
    std::size_t start = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rho(i, i).real() > best) {
            best = rho(i, i).real();
            start = i;
        }
    }
    StateVector x = StateVector::basis(n, start);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<Complex> w(n);
        for (std::size_t i = 0; i < n; ++i) {
            Complex acc{};
            for (std::size_t j = 0; j < n; ++j) acc += rho(i, j) * x[j];
            w[i] = acc;
        }
        StateVector next{std::move(w)};
        const double norm = next.norm();
        if (norm < 1e-15) throw std::runtime_error("power iteration collapsed to zero");
        next = next.normalized();
        const double moved = max_abs_diff(next, x);
        x = std::move(next);
        if (moved < 1e-15) break;
    }
    return x;
}

inline Complex rayleigh(const DensityMatrix& rho, const StateVector& x) {
    Complex acc{};
    for (std::size_t i = 0; i < rho.dim(); ++i)
        for (std::size_t j = 0; j < rho.dim(); ++j) acc += std::conj(x[i]) * rho(i, j) * x[j];
    return acc;
}

// Rotate so the largest-magnitude entry is real positive.
inline StateVector canonical_phase(const StateVector& x) {
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (std::abs(x[i]) > best) {
            best = std::abs(x[i]);
            pivot = i;
        }
    }
    const Complex ph = x[pivot] / std::abs(x[pivot]);
    std::vector<Complex> out(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) out[i] = x[i] / ph;
    return StateVector(std::move(out));
}

}  // namespace detail

/// Per-party factors of a separable state: the dominant eigenvector of each
/// party's reduced density matrix, phase-fixed so the largest entry is real
/// positive. Their tensor product reproduces the input up to one global
/// phase. Throws if the state is not separable under the grouping.
inline std::vector<StateVector> extract_factors(const StateVector& v, const GroupingSpec& g) {
    const std::size_t total = linalg::log2_exact(v.dim());
    const double measure = separability_measure(v, g);
    if (measure > kSeparableTol) {
        throw std::invalid_argument("state is not separable under this grouping (measure " +
                                    std::to_string(measure) + ")");
    }
    std::vector<StateVector> factors;
    for (const auto& party : g.parties) {
        const DensityMatrix rho = linalg::reduced_density(v, party, total);
        const StateVector xi = detail::dominant_eigenvector(rho);
        if (detail::rayleigh(rho, xi).real() < 1.0 - kSeparableTol) {
            throw std::invalid_argument("a party's reduced state is not pure enough to factor");
        }
        factors.push_back(detail::canonical_phase(xi));
    }
    StateVector product = factors[0];
    for (std::size_t p = 1; p < factors.size(); ++p) product = tensor(product, factors[p]);
    if (linalg::fidelity_global_phase(product, v) < 1.0 - kSeparableTol) {
        throw std::runtime_error("extracted factors fail to reproduce the state");
    }
    return factors;
}

struct SeparabilityReport {
    GroupingSpec grouping;
    double measure = 0.0;
    bool separable = false;
    std::vector<StateVector> factors;  // present iff separable
};

inline SeparabilityReport analyze(const StateVector& v, const GroupingSpec& g) {
    SeparabilityReport report;
    report.grouping = g;
    report.measure = separability_measure(v, g);
    report.separable = report.measure <= kSeparableTol;
    if (report.separable) report.factors = extract_factors(v, g);
    return report;
}

/// First allowed grouping under which v is separable, in canonical order.
inline std::optional<GroupingSpec> plan_grouping(const StateVector& v, GroupingPolicy policy) {
    const std::size_t total = linalg::log2_exact(v.dim());
    for (const auto& g : allowed_groupings(total, policy)) {
        if (separability_measure(v, g) <= kSeparableTol) return g;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// U_s catalogs
// ---------------------------------------------------------------------------

/// A finite ordered list of real unitaries fixed by both parties before the
/// protocol; announcing a choice costs log2(size) cbits.
struct UsCatalog {
    std::string name;
    std::vector<Matrix> entries;
};

inline UsCatalog identity_catalog(std::size_t total_qubits) {
    return UsCatalog{"identity", {Matrix::identity(std::size_t{1} << total_qubits)}};
}

/// All qubit-slot permutations, in lexicographic order of the slot map
/// (entry 0 is the identity).
inline UsCatalog slot_permutation_catalog(std::size_t total_qubits) {
    std::vector<std::size_t> perm(total_qubits);
    std::iota(perm.begin(), perm.end(), 0);
    UsCatalog cat{"slot-permutations", {}};
    do {
        cat.entries.push_back(linalg::slot_permutation(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return cat;
}

/// Applies the catalog entry at `index` to v. The sub-protocols need real
/// targets, so entries must be real as well as unitary.
inline StateVector apply_us(const StateVector& v, const UsCatalog& cat, std::size_t index) {
    if (index >= cat.entries.size()) {
        throw std::invalid_argument("transformation index is not in the registered catalog");
    }
    const Matrix& u = cat.entries[index];
    if (!u.is_unitary()) throw std::invalid_argument("catalog entry is not unitary");
    if (u.max_imag() > linalg::kExactTol) throw std::invalid_argument("catalog entry is not real");
    return linalg::apply(u, v);
}

// ---------------------------------------------------------------------------
// Composed protocol
// ---------------------------------------------------------------------------

struct SeparablePlan {
    std::size_t us_index = 0;
    std::size_t grouping_index = 0;   // within allowed_groupings(policy)
    std::size_t grouping_count = 1;   // announcement alphabet under enumerate
    GroupingSpec grouping;
    double measure = 0.0;             // of the transformed embedding
    std::vector<StateVector> factors;
};

/// Searches catalog entries (identity first) and allowed groupings in
/// canonical order for a combination that makes v separable.
inline std::optional<SeparablePlan> plan_separable(const StateVector& v, GroupingPolicy policy,
                                                   const UsCatalog& us) {
    const std::size_t total = linalg::log2_exact(v.dim());
    const auto groupings = allowed_groupings(total, policy);
    for (std::size_t ui = 0; ui < us.entries.size(); ++ui) {
        const StateVector w = apply_us(v, us, ui);
        for (std::size_t gi = 0; gi < groupings.size(); ++gi) {
            const double measure = separability_measure(w, groupings[gi]);
            if (measure <= kSeparableTol) {
                SeparablePlan plan;
                plan.us_index = ui;
                plan.grouping_index = gi;
                plan.grouping_count = groupings.size();
                plan.grouping = groupings[gi];
                plan.measure = measure;
                plan.factors = extract_factors(w, groupings[gi]);
                return plan;
            }
        }
    }
    return std::nullopt;
}

namespace detail {

inline std::vector<double> real_factor(const StateVector& f) {
    std::vector<double> out(f.dim());
    for (std::size_t i = 0; i < f.dim(); ++i) {
        if (std::abs(f[i].imag()) > states::kEquivTol) {
            throw std::invalid_argument("per-party factor is not real");
        }
        out[i] = f[i].real();
    }
    double n2 = 0.0;
    for (double x : out) n2 += x * x;
    const double n = std::sqrt(n2);
    for (double& x : out) x /= n;
    return out;
}

// Alice's operator for one party. Size-1 parties use the two-outcome
// projective scheme (rows are the target and its quarter-turn partner);
// pairs and triples stack the catalog images as in minimum RSP.
inline Matrix party_alice_operator(const std::vector<double>& f) {
    if (f.size() == 2) {
        return Matrix(2, 2, {f[0], f[1], f[1], -f[0]});
    }
    return realspace::alice_operator(f, realspace::catalog(f.size()));
}

// Bob's correction for one party outcome. The quarter-turn [[0,-1],[1,0]]
// maps (b,-a) back to (a,b); larger parties undo the catalog operator.
inline Matrix party_correction(std::size_t outcome, std::size_t dim) {
    if (dim == 2) {
        if (outcome == 0) return Matrix::identity(2);
        return Matrix(2, 2, {0, -1, 1, 0});
    }
    return realspace::catalog(dim).operators[outcome].transposed();
}

struct ComposedSetup {
    std::size_t pairs = 0;
    SeparablePlan plan;
    std::vector<std::vector<double>> party_factors;
    StateVector transformed;  // U_s applied to the embedding; Bob's target
    Matrix alice;
    double announce_cbits = 0.0;
};

inline ComposedSetup compose(const states::QuditSpec& q, std::size_t pairs,
                             GroupingPolicy policy, const UsCatalog& us, CbitMode mode) {
    const auto [lo, hi] = states::qubit_bounds(q.s);
    if (pairs < lo || pairs > hi) {
        throw std::invalid_argument("pair count " + std::to_string(pairs) +
                                    " is outside the admissible range for s = " + std::to_string(q.s));
    }
    for (const auto& a : q.amplitudes) {
        if (std::abs(a.imag()) > linalg::kExactTol) {
            throw std::invalid_argument("the separable-target protocol requires real amplitudes");
        }
    }
    const StateVector v = states::embed(q, pairs);
    auto plan = plan_separable(v, policy, us);
    if (!plan) {
        throw NotPreparableError(
            "target is not separable under any allowed grouping, with every registered "
            "transformation tried");
    }

    ComposedSetup setup;
    setup.pairs = pairs;
    setup.plan = std::move(*plan);
    setup.transformed = apply_us(v, us, setup.plan.us_index);
    for (const auto& f : setup.plan.factors) setup.party_factors.push_back(real_factor(f));

    setup.alice = party_alice_operator(setup.party_factors[0]);
    for (std::size_t p = 1; p < setup.party_factors.size(); ++p) {
        setup.alice = tensor(setup.alice, party_alice_operator(setup.party_factors[p]));
    }

    if (us.entries.size() > 1) {
        setup.announce_cbits += channel::message_cbits(us.entries.size(), mode);
    }
    if (policy == GroupingPolicy::enumerate_contiguous) {
        setup.announce_cbits += channel::message_cbits(setup.plan.grouping_count, mode);
    }
    return setup;
}

// Splits a joint outcome into per-party outcomes and applies the per-party
// corrections on the party's slots.
inline StateVector correct_branch(const ComposedSetup& setup, std::size_t outcome,
                                  const StateVector& bob_state) {
    StateVector fixed = bob_state;
    for (const auto& party : setup.plan.grouping.parties) {
        const std::size_t size = party.size();
        const std::size_t shift = setup.pairs - party.front() - size;
        const std::size_t sub = (outcome >> shift) & ((std::size_t{1} << size) - 1);
        fixed = linalg::apply_on_slots(party_correction(sub, std::size_t{1} << size), fixed, party);
    }
    return fixed;
}

}  // namespace detail

/// Full branch enumeration of the composed protocol: all 2^L outcomes are
/// success branches and the per-run cost is L bits plus any announcements.
inline BranchTable run_separable_exhaustive(const states::QuditSpec& q, std::size_t pairs,
                                            GroupingPolicy policy, const UsCatalog& us,
                                            CbitMode mode = CbitMode::fractional) {
    const auto setup = detail::compose(q, pairs, policy, us, mode);
    const auto after = channel::alice_apply(channel::build_channel(pairs), setup.alice);
    double party_cbits = 0.0;
    for (const auto& party : setup.plan.grouping.parties) {
        party_cbits += channel::message_cbits(std::size_t{1} << party.size(), mode);
    }
    const double cbits = setup.announce_cbits + party_cbits;

    BranchTable table;
    table.protocol = "separable";
    table.s = q.s;
    table.pairs = pairs;
    for (const auto& br : channel::measure_exhaustive(after)) {
        ProtocolBranch out;
        out.outcome = br.outcome;
        out.prob = br.prob;
        out.cbits = cbits;
        out.bob_final = detail::correct_branch(setup, br.outcome, br.bob_state);
        out.fidelity = linalg::fidelity_global_phase(out.bob_final, setup.transformed);
        out.success = out.fidelity >= 1.0 - channel::kSuccessFidelityTol;
        table.branches.push_back(std::move(out));
    }
    return table;
}

/// One sampled round. Messages appear in announcement order: the catalog
/// index when a multi-entry catalog is enabled, the grouping index under
/// the enumerating policy, then one outcome symbol per party.
inline ProtocolTranscript run_separable_sampled(const states::QuditSpec& q, std::size_t pairs,
                                                GroupingPolicy policy, const UsCatalog& us,
                                                std::uint64_t seed,
                                                CbitMode mode = CbitMode::fractional) {
    const auto setup = detail::compose(q, pairs, policy, us, mode);
    const auto after = channel::alice_apply(channel::build_channel(pairs), setup.alice);
    std::mt19937_64 rng(seed);
    const auto br = channel::measure_sampled(after, rng);

    ProtocolTranscript t;
    t.protocol = "separable";
    t.s = q.s;
    t.pairs = pairs;
    t.alice_outcome = br.outcome;
    if (us.entries.size() > 1) {
        channel::charge_message(t, us.entries.size(), setup.plan.us_index, mode);
    }
    if (policy == GroupingPolicy::enumerate_contiguous) {
        channel::charge_message(t, setup.plan.grouping_count, setup.plan.grouping_index, mode);
    }
    for (const auto& party : setup.plan.grouping.parties) {
        const std::size_t size = party.size();
        const std::size_t shift = pairs - party.front() - size;
        const std::size_t sub = (br.outcome >> shift) & ((std::size_t{1} << size) - 1);
        channel::charge_message(t, std::size_t{1} << size, sub, mode);
    }
    t.bob_final = detail::correct_branch(setup, br.outcome, br.bob_state);
    t.fidelity = linalg::fidelity_global_phase(t.bob_final, setup.transformed);
    t.success = t.fidelity >= 1.0 - channel::kSuccessFidelityTol;
    return t;
}

}  // namespace qrsp::separable
