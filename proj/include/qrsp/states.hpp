// Qudit state specifications, decimal/binary index codec, zero-padded
// embedding of an s-level state into 2^L qubit amplitudes, and the
// cross-dimension equivalence predicate.

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrsp/linalg.hpp"

namespace qrsp::states {

using linalg::Complex;
using linalg::StateVector;

/// Tolerance for cross-dimension state comparison. Looser than the linalg
/// tolerances because compared values pass through a unitary plus a
/// measurement renormalization.
inline constexpr double kEquivTol = 1e-9;
/// Input coefficient vectors within this distance of unit norm are
/// normalized on load; anything further off is rejected.
inline constexpr double kLoadNormTol = 1e-6;

enum class QuditKind { equatorial, real, general };

inline std::string kind_name(QuditKind k) {
    switch (k) {
        case QuditKind::equatorial: return "equatorial";
        case QuditKind::real: return "real";
        case QuditKind::general: return "general";
    }
    throw std::logic_error("unreachable");
}

/// An s-level pure state with a kind tag.
///
/// Invariants (enforced by the factories):
///   * sum |amplitude|^2 = 1 within 1e-10;
///   * equatorial: every |amplitude| = 1/sqrt(s) within 1e-10;
///   * real: every imaginary part = 0 within 1e-12.
struct QuditSpec {
    std::size_t s = 0;
    std::vector<Complex> amplitudes;
    QuditKind kind = QuditKind::general;
};

namespace detail {

inline std::vector<Complex> normalize_or_reject(std::vector<Complex> amps) {
    double n2 = 0.0;
    for (const auto& a : amps) n2 += std::norm(a);
    const double n = std::sqrt(n2);
    if (std::abs(n - 1.0) > kLoadNormTol) {
        throw std::invalid_argument("coefficient vector norm " + std::to_string(n) +
                                    " is not within 1e-6 of 1");
    }
    for (auto& a : amps) a /= n;
    return amps;
}

}  // namespace detail

/// Equatorial s-level state: amplitudes e^{i phi_j}/sqrt(s). Phases are in
/// radians; one phase per level.
inline QuditSpec equatorial_spec(std::size_t s, const std::vector<double>& phases) {
    if (s < 1) throw std::invalid_argument("dimension must be at least 1");
    if (phases.size() != s) {
        throw std::invalid_argument("expected " + std::to_string(s) + " phases, got " +
                                    std::to_string(phases.size()));
    }
    const double r = 1.0 / std::sqrt(static_cast<double>(s));
    std::vector<Complex> amps(s);
    for (std::size_t j = 0; j < s; ++j) amps[j] = std::polar(r, phases[j]);
    return QuditSpec{s, std::move(amps), QuditKind::equatorial};
}

/// Real s-level state from real coefficients (normalized if within 1e-6 of
/// unit norm, rejected otherwise).
inline QuditSpec real_spec(std::size_t s, const std::vector<double>& coeffs) {
    if (s < 1) throw std::invalid_argument("dimension must be at least 1");
    if (coeffs.size() != s) {
        throw std::invalid_argument("expected " + std::to_string(s) + " coefficients, got " +
                                    std::to_string(coeffs.size()));
    }
    std::vector<Complex> amps(s);
    for (std::size_t j = 0; j < s; ++j) amps[j] = coeffs[j];
    return QuditSpec{s, detail::normalize_or_reject(std::move(amps)), QuditKind::real};
}

/// General s-level state from explicit real/imaginary parts (normalized if
/// within 1e-6 of unit norm, rejected otherwise).
inline QuditSpec general_spec(std::size_t s, const std::vector<double>& re,
                              const std::vector<double>& im) {
    if (s < 1) throw std::invalid_argument("dimension must be at least 1");
    if (re.size() != s || im.size() != s) {
        throw std::invalid_argument("re/im must each hold " + std::to_string(s) + " values");
    }
    std::vector<Complex> amps(s);
    for (std::size_t j = 0; j < s; ++j) amps[j] = Complex(re[j], im[j]);
    return QuditSpec{s, detail::normalize_or_reject(std::move(amps)), QuditKind::general};
}

/// Checks the per-kind amplitude invariants.
inline void validate(const QuditSpec& q) {
    if (q.amplitudes.size() != q.s) throw std::invalid_argument("amplitude count != s");
    double n2 = 0.0;
    for (const auto& a : q.amplitudes) n2 += std::norm(a);
    if (std::abs(n2 - 1.0) > linalg::kStateTol) {
        throw std::invalid_argument("qudit spec is not normalized");
    }
    if (q.kind == QuditKind::equatorial) {
        const double r = 1.0 / std::sqrt(static_cast<double>(q.s));
        for (const auto& a : q.amplitudes) {
            if (std::abs(std::abs(a) - r) > linalg::kStateTol) {
                throw std::invalid_argument("equatorial amplitudes must all have modulus 1/sqrt(s)");
            }
        }
    } else if (q.kind == QuditKind::real) {
        for (const auto& a : q.amplitudes) {
            if (std::abs(a.imag()) > linalg::kExactTol) {
                throw std::invalid_argument("real-kind amplitudes must have zero imaginary part");
            }
        }
    }
}

/// Minimum and maximum qubit counts able to carry an s-level state:
/// L_min = ceil(log2 s), L_max = floor(1 + log2 s).
inline std::pair<std::size_t, std::size_t> qubit_bounds(std::size_t s) {
    if (s < 1) throw std::invalid_argument("dimension must be at least 1");
    const std::size_t l_min = (s == 1) ? 0 : std::bit_width(s - 1);
    const std::size_t l_max = std::bit_width(s);
    return {l_min, l_max};
}

/// Fixed decimal/binary codec: bit 0 of the string is the most significant,
/// so the last tensor factor carries the least significant bit.
struct IndexCodec {
    std::size_t qubits = 0;

    std::vector<int> encode(std::size_t k) const {
        if (k >= (std::size_t{1} << qubits)) {
            throw std::out_of_range("index " + std::to_string(k) + " needs more than " +
                                    std::to_string(qubits) + " qubits");
        }
        std::vector<int> bits(qubits);
        for (std::size_t i = 0; i < qubits; ++i) {
            bits[i] = static_cast<int>((k >> (qubits - 1 - i)) & 1);
        }
        return bits;
    }

    std::size_t decode(const std::vector<int>& bits) const {
        if (bits.size() != qubits) throw std::invalid_argument("bit string length != qubit count");
        std::size_t k = 0;
        for (std::size_t i = 0; i < qubits; ++i) {
            if (bits[i] != 0 && bits[i] != 1) throw std::invalid_argument("bits must be 0 or 1");
            k = (k << 1) | static_cast<std::size_t>(bits[i]);
        }
        return k;
    }
};

inline std::vector<int> encode_index(std::size_t k, std::size_t qubits) {
    return IndexCodec{qubits}.encode(k);
}

inline std::size_t decode_index(const std::vector<int>& bits) {
    return IndexCodec{bits.size()}.decode(bits);
}

/// Zero-padded embedding of the s amplitudes into a 2^L state vector:
/// entry j < s carries amplitudes[j], everything above is zero.
inline StateVector embed(const QuditSpec& q, std::size_t qubits) {
    const std::size_t dim = std::size_t{1} << qubits;
    if (dim < q.s) {
        throw std::invalid_argument(std::to_string(qubits) + " qubits cannot hold " +
                                    std::to_string(q.s) + " levels");
    }
    std::vector<Complex> a(dim);
    for (std::size_t j = 0; j < q.s; ++j) a[j] = q.amplitudes[j];
    return StateVector(std::move(a));
}

enum class PhaseMode { global_phase_free, strict };

/// True iff the coefficients of `a` on the listed basis indices match q's
/// amplitudes entrywise (up to one shared global phase unless strict) and
/// `a` carries no weight outside that subspace.
inline bool equivalent(const StateVector& a, const std::vector<std::size_t>& subspace_basis,
                       const QuditSpec& q, PhaseMode mode = PhaseMode::global_phase_free) {
    if (subspace_basis.size() != q.s) {
        throw std::invalid_argument("subspace index count != qudit dimension");
    }
    std::vector<bool> inside(a.dim(), false);
    for (std::size_t idx : subspace_basis) {
        if (idx >= a.dim()) throw std::invalid_argument("subspace index out of range");
        if (inside[idx]) throw std::invalid_argument("duplicate subspace index");
        inside[idx] = true;
    }

    double outside2 = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (!inside[i]) outside2 += std::norm(a[i]);
    }
    if (std::sqrt(outside2) > kEquivTol) return false;

    Complex phase{1.0};
    if (mode == PhaseMode::global_phase_free) {
        // Align against the largest reference amplitude; phase is undefined
        // on (near-)zero entries.
        std::size_t pivot = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < q.s; ++j) {
            if (std::abs(q.amplitudes[j]) > best) {
                best = std::abs(q.amplitudes[j]);
                pivot = j;
            }
        }
        const Complex num = a[subspace_basis[pivot]];
        const Complex den = q.amplitudes[pivot];
        if (std::abs(num) < kEquivTol) return false;
        phase = (num / den) / std::abs(num / den);
    }
    for (std::size_t j = 0; j < q.s; ++j) {
        if (std::abs(a[subspace_basis[j]] - phase * q.amplitudes[j]) > kEquivTol) return false;
    }
    return true;
}

}  // namespace qrsp::states
