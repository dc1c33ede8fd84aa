// Remote preparation of equatorial s-level states over L EPR pairs.
//
// The target family is psi_k = (1/sqrt(s)) sum_j e^{i 2 pi k j / s}
// e^{i phi_j} |j>, phi_0 = 0. Alice applies U = U' (+) I_{2^L - s} where
// row k of U' holds the unconjugated coefficients of psi_k; measuring
// outcome k < s leaves Bob in psi_k, which a diagonal phase correction
// turns into the target psi_0. Outcomes k >= s are the failure branch.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrsp/channel.hpp"
#include "qrsp/linalg.hpp"
#include "qrsp/states.hpp"

namespace qrsp::equatorial {

using channel::BranchTable;
using channel::CbitMode;
using channel::EprChannel;
using channel::ProtocolBranch;
using channel::ProtocolTranscript;
using linalg::Complex;
using linalg::Matrix;
using linalg::StateVector;

struct EquatorialEnsemble {
    std::size_t s = 0;
    std::vector<double> phases;  // radians, phases[0] = 0
};

inline EquatorialEnsemble make_ensemble(std::size_t s, std::vector<double> phases) {
    if (s < 1) throw std::invalid_argument("dimension must be at least 1");
    if (phases.size() != s) {
        throw std::invalid_argument("expected " + std::to_string(s) + " phases");
    }
    if (phases[0] != 0.0) throw std::invalid_argument("the first phase must be 0");
    return EquatorialEnsemble{s, std::move(phases)};
}

/// The s orthonormal family members; member 0 is the preparation target.
inline std::vector<StateVector> target_family(std::size_t s, const std::vector<double>& phases) {
    const EquatorialEnsemble e = make_ensemble(s, phases);
    const double r = 1.0 / std::sqrt(static_cast<double>(s));
    std::vector<StateVector> family;
    family.reserve(s);
    for (std::size_t k = 0; k < s; ++k) {
        std::vector<Complex> a(s);
        for (std::size_t j = 0; j < s; ++j) {
            const double dft = 2.0 * std::numbers::pi * static_cast<double>(k) *
                               static_cast<double>(j) / static_cast<double>(s);
            a[j] = std::polar(r, dft + e.phases[j]);
        }
        family.emplace_back(std::move(a));
    }
    return family;
}

/// U = U' (+) I_{2^L - s}: row k of the top block carries psi_k's
/// unconjugated coefficients, so (U (x) I) maps the fresh channel to
/// 2^{-L/2} (sum_{k<s} |k> psi_k + sum_{k>=s} |k>|k>).
inline Matrix build_alice_operator(const std::vector<StateVector>& family, std::size_t pairs) {
    const std::size_t s = family.size();
    const std::size_t dim = std::size_t{1} << pairs;
    if (dim < s) throw std::invalid_argument("2^L is smaller than the family size");
    for (std::size_t k = 0; k < s; ++k) {
        if (family[k].dim() != s) throw std::invalid_argument("family member dimension != s");
        for (std::size_t k2 = k; k2 < s; ++k2) {
            const Complex g = linalg::inner_product(family[k], family[k2]);
            const Complex expect = (k == k2) ? Complex{1.0} : Complex{};
            if (std::abs(g - expect) > linalg::kStateTol) {
                throw std::invalid_argument("family is not orthonormal");
            }
        }
    }
    Matrix u = Matrix::identity(dim);
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t j = 0; j < s; ++j) u(k, j) = family[k][j];
    }
    return u;
}

/// Bob's correction for outcome k: diag(e^{-i 2 pi k j / s}) on the s-block,
/// identity above it. Undoes psi_k's DFT phases, giving psi_0 exactly.
inline Matrix correction(std::size_t k, std::size_t s, std::size_t pairs) {
    if (k >= s) throw std::invalid_argument("failure outcomes have no correction");
    const std::size_t dim = std::size_t{1} << pairs;
    if (dim < s) throw std::invalid_argument("2^L is smaller than s");
    std::vector<Complex> d(dim, Complex{1.0});
    for (std::size_t j = 0; j < s; ++j) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(j) / static_cast<double>(s);
        d[j] = std::polar(1.0, ang);
    }
    return Matrix::diagonal(d);
}

namespace detail {

inline void check_dims(std::size_t s, std::size_t pairs) {
    const auto [lo, hi] = states::qubit_bounds(s);
    if (pairs < lo || pairs > hi) {
        throw std::invalid_argument("pair count " + std::to_string(pairs) +
                                    " is outside the admissible range for s = " + std::to_string(s));
    }
}

inline std::size_t message_alphabet(std::size_t s, std::size_t pairs) {
    return (s == (std::size_t{1} << pairs)) ? s : s + 1;
}

struct Prepared {
    EprChannel after;
    StateVector target;     // embedded psi_0
    std::size_t alphabet;
};

inline Prepared prepare(std::size_t s, const std::vector<double>& phases, std::size_t pairs) {
    check_dims(s, pairs);
    const auto family = target_family(s, phases);
    const Matrix u = build_alice_operator(family, pairs);
    const EprChannel after = channel::alice_apply(channel::build_channel(pairs), u);
    const StateVector target = states::embed(states::equatorial_spec(s, phases), pairs);
    return Prepared{after, target, message_alphabet(s, pairs)};
}

}  // namespace detail

/// Full branch enumeration: success probability is exactly s/2^L, and every
/// success branch delivers the target after correction.
inline BranchTable run_equatorial_exhaustive(std::size_t s, const std::vector<double>& phases,
                                             std::size_t pairs,
                                             CbitMode mode = CbitMode::fractional) {
    const auto prep = detail::prepare(s, phases, pairs);
    const double cbits = channel::message_cbits(prep.alphabet, mode);
    BranchTable table;
    table.protocol = "equatorial";
    table.s = s;
    table.pairs = pairs;
    for (const auto& br : channel::measure_exhaustive(prep.after)) {
        ProtocolBranch out;
        out.outcome = br.outcome;
        out.prob = br.prob;
        out.cbits = cbits;
        if (br.outcome < s) {
            out.bob_final = channel::bob_correct(br.bob_state, correction(br.outcome, s, pairs));
            out.fidelity = linalg::fidelity_global_phase(out.bob_final, prep.target);
            out.success = out.fidelity >= 1.0 - channel::kSuccessFidelityTol;
        } else {
            out.bob_final = br.bob_state;
            out.fidelity = br.prob < 1e-15
                               ? 0.0
                               : linalg::fidelity_global_phase(out.bob_final, prep.target);
            out.success = false;
        }
        table.branches.push_back(std::move(out));
    }
    return table;
}

/// One sampled protocol round, reproducible from the seed.
inline ProtocolTranscript run_equatorial_sampled(std::size_t s, const std::vector<double>& phases,
                                                 std::size_t pairs, std::uint64_t seed,
                                                 CbitMode mode = CbitMode::fractional) {
    const auto prep = detail::prepare(s, phases, pairs);
    std::mt19937_64 rng(seed);
    const auto br = channel::measure_sampled(prep.after, rng);

    ProtocolTranscript t;
    t.protocol = "equatorial";
    t.s = s;
    t.pairs = pairs;
    t.alice_outcome = br.outcome;
    if (br.outcome < s) {
        channel::charge_message(t, prep.alphabet, br.outcome, mode);
        t.bob_final = channel::bob_correct(br.bob_state, correction(br.outcome, s, pairs));
        t.fidelity = linalg::fidelity_global_phase(t.bob_final, prep.target);
        t.success = t.fidelity >= 1.0 - channel::kSuccessFidelityTol;
    } else {
        channel::charge_message(t, prep.alphabet, s, mode);  // shared failure symbol
        t.bob_final = br.bob_state;
        t.fidelity = linalg::fidelity_global_phase(t.bob_final, prep.target);
        t.success = false;
    }
    return t;
}

}  // namespace qrsp::equatorial
