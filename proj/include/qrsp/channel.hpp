// The L-EPR-pair channel and the two-party protocol engine: Alice applies a
// unitary to her half, measures her qubits in the computational basis, sends
// a metered classical message, and Bob applies a correction.
//
// Joint-state layout: Alice's L qubits occupy the most-significant slots
// (0..L-1), Bob's the least-significant (L..2L-1), so Alice's 2^L-dim
// unitary acts as (M (x) I) and a joint basis index reads a*2^L + b.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrsp/linalg.hpp"

namespace qrsp::channel {

using linalg::Complex;
using linalg::Matrix;
using linalg::StateVector;

/// A run counts as successful only if the delivered state reaches this
/// fidelity against the declared target.
inline constexpr double kSuccessFidelityTol = 1e-8;
inline constexpr std::size_t kMaxPairs = 10;

/// 53-bit uniform draw in [0, 1); bit-stable across platforms.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct EprChannel {
    std::size_t pairs = 0;
    StateVector joint;  // dim 4^pairs

    std::size_t bob_dim() const { return std::size_t{1} << pairs; }
};

/// 2^{-L/2} sum_k |k>_A |k>_B.
inline EprChannel build_channel(std::size_t pairs) {
    if (pairs < 1 || pairs > kMaxPairs) {
        throw std::invalid_argument("pair count must be between 1 and " + std::to_string(kMaxPairs));
    }
    const std::size_t half = std::size_t{1} << pairs;
    const double amp = 1.0 / std::sqrt(static_cast<double>(half));
    std::vector<Complex> joint(half * half);
    for (std::size_t k = 0; k < half; ++k) joint[k * half + k] = amp;
    return EprChannel{pairs, StateVector(std::move(joint))};
}

/// Applies a unitary to Alice's slots only.
inline EprChannel alice_apply(const EprChannel& ch, const Matrix& m) {
    if (m.rows() != ch.bob_dim() || !m.square()) {
        throw std::invalid_argument("operator dimension does not match Alice's side");
    }
    if (!m.is_unitary()) throw std::invalid_argument("Alice's operator must be unitary");
    std::vector<std::size_t> alice_slots(ch.pairs);
    for (std::size_t i = 0; i < ch.pairs; ++i) alice_slots[i] = i;
    return EprChannel{ch.pairs, linalg::apply_on_slots(m, ch.joint, alice_slots)};
}

struct MeasurementBranch {
    std::size_t outcome = 0;      // Alice's decimal result
    double prob = 0.0;
    StateVector bob_state;        // normalized conditional state
};

namespace detail {

inline double outcome_prob(const EprChannel& ch, std::size_t k) {
    const std::size_t bd = ch.bob_dim();
    double p = 0.0;
    for (std::size_t b = 0; b < bd; ++b) p += std::norm(ch.joint[k * bd + b]);
    return p;
}

inline StateVector conditional_bob(const EprChannel& ch, std::size_t k, double prob) {
    const std::size_t bd = ch.bob_dim();
    const double inv = 1.0 / std::sqrt(prob);
    std::vector<Complex> bob(bd);
    for (std::size_t b = 0; b < bd; ++b) bob[b] = ch.joint[k * bd + b] * inv;
    return StateVector(std::move(bob));
}

}  // namespace detail

/// Born probability of Alice's outcome k and Bob's normalized conditional
/// state. Requesting a zero-probability branch is an error.
inline MeasurementBranch collapse_bob(const EprChannel& ch, std::size_t k) {
    if (k >= ch.bob_dim()) throw std::invalid_argument("outcome index out of range");
    const double p = detail::outcome_prob(ch, k);
    if (p < 1e-15) {
        throw std::invalid_argument("outcome " + std::to_string(k) + " has zero probability");
    }
    return MeasurementBranch{k, p, detail::conditional_bob(ch, k, p)};
}

/// All of Alice's computational-basis outcomes with exact probabilities,
/// summing to 1. Zero-probability outcomes are kept in the list but carry
/// an empty conditional state.
inline std::vector<MeasurementBranch> measure_exhaustive(const EprChannel& ch) {
    const std::size_t n = ch.bob_dim();
    std::vector<MeasurementBranch> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double p = detail::outcome_prob(ch, k);
        MeasurementBranch br;
        br.outcome = k;
        br.prob = p;
        if (p >= 1e-15) br.bob_state = detail::conditional_bob(ch, k, p);
        out.push_back(std::move(br));
    }
    return out;
}

/// One Born-rule sample of Alice's measurement.
inline MeasurementBranch measure_sampled(const EprChannel& ch, std::mt19937_64& rng) {
    const std::size_t n = ch.bob_dim();
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = detail::outcome_prob(ch, k);
        acc += p;
        if (u < acc && p >= 1e-15) return MeasurementBranch{k, p, detail::conditional_bob(ch, k, p)};
    }
    // Rounding pushed the cumulative sum below u; return the last live branch.
    for (std::size_t k = n; k-- > 0;) {
        const double p = detail::outcome_prob(ch, k);
        if (p >= 1e-15) return MeasurementBranch{k, p, detail::conditional_bob(ch, k, p)};
    }
    throw std::logic_error("channel has no measurable branch");
}

inline StateVector bob_correct(const StateVector& bob_state, const Matrix& m) {
    return linalg::apply(m, bob_state);
}

// ---------------------------------------------------------------------------
// Classical messaging and cbit accounting
// ---------------------------------------------------------------------------

struct ClassicalMessage {
    std::size_t alphabet_size = 0;
    std::size_t symbol = 0;
};

enum class CbitMode { fractional, integer };

/// Cost of one message: log2(alphabet) exactly, or its ceiling in integer
/// (wire-bit) mode.
inline double message_cbits(std::size_t alphabet_size, CbitMode mode = CbitMode::fractional) {
    if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
    const double bits = std::log2(static_cast<double>(alphabet_size));
    return mode == CbitMode::fractional ? bits : std::ceil(bits);
}

struct ProtocolTranscript {
    std::string protocol;
    std::size_t s = 0;
    std::size_t pairs = 0;
    std::size_t alice_outcome = 0;
    std::vector<ClassicalMessage> messages;
    double cbits_total = 0.0;
    StateVector bob_final;
    bool success = false;
    double fidelity = 0.0;
};

inline ProtocolTranscript& charge_message(ProtocolTranscript& t, std::size_t alphabet_size,
                                          std::size_t symbol,
                                          CbitMode mode = CbitMode::fractional) {
    if (symbol >= alphabet_size) throw std::invalid_argument("message symbol out of range");
    t.messages.push_back(ClassicalMessage{alphabet_size, symbol});
    t.cbits_total += message_cbits(alphabet_size, mode);
    return t;
}

/// Classical cost of teleporting the same target instead: log2(s) + L.
/// Reporting baseline only; teleportation is not simulated.
inline double teleport_cost(std::size_t s, std::size_t pairs) {
    if (s < 1) throw std::invalid_argument("teleportation baseline needs s >= 1");
    return std::log2(static_cast<double>(s)) + static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// Exhaustive protocol results
// ---------------------------------------------------------------------------

/// One fully-analyzed measurement branch of a protocol run.
struct ProtocolBranch {
    std::size_t outcome = 0;
    double prob = 0.0;
    bool success = false;
    double fidelity = 0.0;   // after Bob's correction, vs the target embedding
    double cbits = 0.0;
    StateVector bob_final;
};

struct BranchTable {
    std::string protocol;
    std::size_t s = 0;
    std::size_t pairs = 0;
    std::vector<ProtocolBranch> branches;

    double success_prob() const {
        double p = 0.0;
        for (const auto& b : branches) {
            if (b.success) p += b.prob;
        }
        return p;
    }

    double cbits_per_run() const {
        double c = 0.0;
        for (const auto& b : branches) c = std::max(c, b.cbits);
        return c;
    }
};

}  // namespace qrsp::channel
