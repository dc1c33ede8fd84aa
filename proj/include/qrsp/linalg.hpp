// Dense complex linear algebra for small multi-qubit simulations.
//
// Conventions used across the library:
//   * tensor(a, b) is the plain Kronecker product: a's index is the more
//     significant block of the result.
//   * qubit "slots" are numbered from the most significant bit, i.e. slot 0
//     is the first tensor factor and the last factor is the least
//     significant bit of a basis index.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrsp::linalg {

using Complex = std::complex<double>;

/// Tolerance for normalization, unitarity and hermiticity checks.
inline constexpr double kStateTol = 1e-10;
/// Tolerance for identities that hold in exact arithmetic.
inline constexpr double kExactTol = 1e-12;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("dimension " + std::to_string(n) + " is not a power of two");
    }
    std::size_t l = 0;
    while ((std::size_t{1} << l) < n) ++l;
    return l;
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Dense row-major complex matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), m_(rows * cols) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
        : rows_(rows), cols_(cols), m_(std::move(entries)) {
        if (m_.size() != rows_ * cols_) {
            throw std::invalid_argument("entry count does not match matrix shape");
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix r(n, n);
        for (std::size_t i = 0; i < n; ++i) r(i, i) = 1.0;
        return r;
    }

    static Matrix diagonal(const std::vector<Complex>& d) {
        Matrix r(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) r(i, i) = d[i];
        return r;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t r, std::size_t c) { return m_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return m_[r * cols_ + c]; }

    Matrix adjoint() const {
        Matrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    Matrix transposed() const {
        Matrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    /// ||M†M - I||_max <= tol.
    bool is_unitary(double tol = kStateTol) const;

    /// Largest |entry| of the imaginary part.
    double max_imag() const {
        double m = 0.0;
        for (const auto& e : m_) m = std::max(m, std::abs(e.imag()));
        return m;
    }

    const std::vector<Complex>& entries() const { return m_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> m_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
    Matrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    }
    return r;
}

inline Matrix operator*(const Complex& s, const Matrix& a) {
    Matrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
    return r;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("matrix shape mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

inline bool Matrix::is_unitary(double tol) const {
    if (!square()) return false;
    return max_abs_diff(adjoint() * (*this), identity(rows_)) <= tol;
}

inline const Matrix& pauli_x() {
    static const Matrix m(2, 2, {0, 1, 1, 0});
    return m;
}

inline const Matrix& pauli_y() {
    static const Matrix m(2, 2, {0, Complex(0, -1), Complex(0, 1), 0});
    return m;
}

inline const Matrix& pauli_z() {
    static const Matrix m(2, 2, {1, 0, 0, -1});
    return m;
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

/// Complex amplitude vector. Physical states are normalized; intermediate
/// values (unnormalized conditional states) use the same carrier.
class StateVector {
  public:
    StateVector() = default;
    explicit StateVector(std::vector<Complex> amps) : a_(std::move(amps)) {}

    static StateVector basis(std::size_t dim, std::size_t index) {
        if (index >= dim) throw std::invalid_argument("basis index out of range");
        std::vector<Complex> a(dim);
        a[index] = 1.0;
        return StateVector(std::move(a));
    }

    std::size_t dim() const { return a_.size(); }
    Complex& operator[](std::size_t i) { return a_[i]; }
    const Complex& operator[](std::size_t i) const { return a_[i]; }
    const std::vector<Complex>& amplitudes() const { return a_; }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& c : a_) s += std::norm(c);
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }
    bool is_normalized(double tol = kStateTol) const { return std::abs(norm_sq() - 1.0) <= tol; }

    StateVector normalized() const {
        const double n = norm();
        if (n < 1e-15) throw std::invalid_argument("cannot normalize a zero vector");
        std::vector<Complex> a(a_);
        for (auto& c : a) c /= n;
        return StateVector(std::move(a));
    }

    double max_imag() const {
        double m = 0.0;
        for (const auto& c : a_) m = std::max(m, std::abs(c.imag()));
        return m;
    }

  private:
    std::vector<Complex> a_;
};

/// <a|b> with the left argument conjugated.
inline Complex inner_product(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("state dimension mismatch");
    Complex s{};
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

/// |<a|b>|^2 — invariant under a global phase on either input.
inline double fidelity_global_phase(const StateVector& a, const StateVector& b) {
    return std::norm(inner_product(a, b));
}

inline double max_abs_diff(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("state dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Tensor products
// ---------------------------------------------------------------------------

inline StateVector tensor(const StateVector& a, const StateVector& b) {
    std::vector<Complex> r(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (a[i] == Complex{}) continue;
        for (std::size_t j = 0; j < b.dim(); ++j) r[i * b.dim() + j] = a[i] * b[j];
    }
    return StateVector(std::move(r));
}

inline Matrix tensor(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex{}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

// ---------------------------------------------------------------------------
// Operator application
// ---------------------------------------------------------------------------

/// M·v with a shape check. Unitary M preserves the norm.
inline StateVector apply(const Matrix& m, const StateVector& v) {
    if (!m.square() || m.cols() != v.dim()) {
        throw std::invalid_argument("operator/state dimension mismatch");
    }
    std::vector<Complex> r(v.dim());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Complex s{};
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return StateVector(std::move(r));
}

/// Applies M to the named qubit slots of v (identity elsewhere). slots[0]
/// is the most significant qubit of M's own index space.
inline StateVector apply_on_slots(const Matrix& m, const StateVector& v,
                                  const std::vector<std::size_t>& slots) {
    const std::size_t total = log2_exact(v.dim());
    const std::size_t k = slots.size();
    if (m.rows() != (std::size_t{1} << k) || !m.square()) {
        throw std::invalid_argument("operator dimension does not match slot count");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (slots[i] >= total) throw std::invalid_argument("slot index out of range");
        for (std::size_t j = i + 1; j < k; ++j) {
            if (slots[i] == slots[j]) throw std::invalid_argument("duplicate slot index");
        }
    }

    // Bit position of each slot within a basis index (slot 0 = MSB).
    std::vector<std::size_t> pos(k);
    std::size_t mask = 0;
    for (std::size_t i = 0; i < k; ++i) {
        pos[i] = total - 1 - slots[i];
        mask |= std::size_t{1} << pos[i];
    }
    const std::size_t sub_dim = std::size_t{1} << k;
    std::vector<std::size_t> scatter(sub_dim, 0);
    for (std::size_t a = 0; a < sub_dim; ++a) {
        for (std::size_t i = 0; i < k; ++i) {
            if ((a >> (k - 1 - i)) & 1) scatter[a] |= std::size_t{1} << pos[i];
        }
    }

    std::vector<Complex> r(v.dim());
    for (std::size_t n = 0; n < v.dim(); ++n) {
        const std::size_t base = n & ~mask;
        std::size_t a = 0;
        for (std::size_t i = 0; i < k; ++i) a |= ((n >> pos[i]) & 1) << (k - 1 - i);
        Complex s{};
        for (std::size_t b = 0; b < sub_dim; ++b) s += m(a, b) * v[base | scatter[b]];
        r[n] = s;
    }
    return StateVector(std::move(r));
}

/// Permutation unitary on 2^L basis states: destination slot d takes the bit
/// of source slot src_of_dst[d].
inline Matrix slot_permutation(const std::vector<std::size_t>& src_of_dst) {
    const std::size_t total = src_of_dst.size();
    for (std::size_t d = 0; d < total; ++d) {
        if (src_of_dst[d] >= total) throw std::invalid_argument("slot index out of range");
        for (std::size_t e = d + 1; e < total; ++e) {
            if (src_of_dst[d] == src_of_dst[e]) throw std::invalid_argument("duplicate slot index");
        }
    }
    const std::size_t dim = std::size_t{1} << total;
    Matrix r(dim, dim);
    for (std::size_t x = 0; x < dim; ++x) {
        std::size_t y = 0;
        for (std::size_t d = 0; d < total; ++d) {
            const std::size_t bit = (x >> (total - 1 - src_of_dst[d])) & 1;
            y |= bit << (total - 1 - d);
        }
        r(y, x) = 1.0;
    }
    return r;
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

class DensityMatrix {
  public:
    DensityMatrix() = default;
    explicit DensityMatrix(std::size_t dim) : dim_(dim), m_(dim * dim) {}
    DensityMatrix(std::size_t dim, std::vector<Complex> entries) : dim_(dim), m_(std::move(entries)) {
        if (m_.size() != dim_ * dim_) throw std::invalid_argument("entry count does not match dimension");
    }

    static DensityMatrix from_state(const StateVector& v) {
        DensityMatrix r(v.dim());
        for (std::size_t i = 0; i < v.dim(); ++i)
            for (std::size_t j = 0; j < v.dim(); ++j) r(i, j) = v[i] * std::conj(v[j]);
        return r;
    }

    std::size_t dim() const { return dim_; }
    Complex& operator()(std::size_t r, std::size_t c) { return m_[r * dim_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return m_[r * dim_ + c]; }

    Complex trace() const {
        Complex t{};
        for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    bool is_hermitian(double tol = kStateTol) const {
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = i; j < dim_; ++j) {
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
            }
        return true;
    }

    bool is_valid(double tol = kStateTol) const {
        return is_hermitian(tol) && std::abs(trace() - Complex{1.0}) <= tol;
    }

  private:
    std::size_t dim_ = 0;
    std::vector<Complex> m_;
};

inline double max_abs_diff(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("density matrix dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

/// tr(rho^2). For Hermitian rho this equals the squared Frobenius norm.
inline double purity(const DensityMatrix& rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.dim(); ++i)
        for (std::size_t j = 0; j < rho.dim(); ++j) s += std::norm(rho(i, j));
    return s;
}

namespace detail {

// Splits a basis index of a 2^total space into (kept bits, traced bits)
// sub-indices, with kept slots keeping their relative order.
struct SlotSplit {
    std::vector<std::size_t> keep_pos;   // bit positions of kept slots, MSB-first
    std::vector<std::size_t> rest_pos;   // bit positions of the others, MSB-first
};

inline SlotSplit make_split(const std::vector<std::size_t>& keep, std::size_t total) {
    std::vector<bool> kept(total, false);
    for (std::size_t s : keep) {
        if (s >= total) throw std::invalid_argument("kept slot out of range");
        if (kept[s]) throw std::invalid_argument("duplicate kept slot");
        kept[s] = true;
    }
    SlotSplit split;
    for (std::size_t s : keep) split.keep_pos.push_back(total - 1 - s);
    for (std::size_t s = 0; s < total; ++s) {
        if (!kept[s]) split.rest_pos.push_back(total - 1 - s);
    }
    return split;
}

inline std::size_t compose_index(const std::vector<std::size_t>& pos, std::size_t sub) {
    std::size_t idx = 0;
    const std::size_t k = pos.size();
    for (std::size_t i = 0; i < k; ++i) {
        if ((sub >> (k - 1 - i)) & 1) idx |= std::size_t{1} << pos[i];
    }
    return idx;
}

}  // namespace detail

/// Reduced density matrix of a pure state over the kept slots, without ever
/// materializing the full |v><v|.
inline DensityMatrix reduced_density(const StateVector& v, const std::vector<std::size_t>& keep,
                                     std::size_t total_qubits) {
    if (v.dim() != (std::size_t{1} << total_qubits)) {
        throw std::invalid_argument("state dimension does not match qubit count");
    }
    const auto split = detail::make_split(keep, total_qubits);
    const std::size_t kd = std::size_t{1} << split.keep_pos.size();
    const std::size_t rd = std::size_t{1} << split.rest_pos.size();
    DensityMatrix rho(kd);
    for (std::size_t i = 0; i < kd; ++i) {
        const std::size_t bi = detail::compose_index(split.keep_pos, i);
        for (std::size_t j = 0; j < kd; ++j) {
            const std::size_t bj = detail::compose_index(split.keep_pos, j);
            Complex s{};
            for (std::size_t r = 0; r < rd; ++r) {
                const std::size_t br = detail::compose_index(split.rest_pos, r);
                s += v[bi | br] * std::conj(v[bj | br]);
            }
            rho(i, j) = s;
        }
    }
    return rho;
}

/// 1 - tr(rho^2) for the reduced state of a pure |v> on the kept slots,
/// evaluated as half the sum of squared 2x2 minors of the (kept x rest)
/// amplitude matrix. Unlike purity(reduced_density(...)), which loses the
/// deficit to cancellation at the 1e-15 level, this form is a sum of
/// non-negative terms and scores an exact-rank-1 split at ~1e-30.
inline double purity_deficit(const StateVector& v, const std::vector<std::size_t>& keep,
                             std::size_t total_qubits) {
    if (v.dim() != (std::size_t{1} << total_qubits)) {
        throw std::invalid_argument("state dimension does not match qubit count");
    }
    const auto split = detail::make_split(keep, total_qubits);
    const std::size_t kd = std::size_t{1} << split.keep_pos.size();
    const std::size_t rd = std::size_t{1} << split.rest_pos.size();
    std::vector<std::size_t> ki(kd), ri(rd);
    for (std::size_t i = 0; i < kd; ++i) ki[i] = detail::compose_index(split.keep_pos, i);
    for (std::size_t j = 0; j < rd; ++j) ri[j] = detail::compose_index(split.rest_pos, j);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < kd; ++i)
        for (std::size_t i2 = i + 1; i2 < kd; ++i2)
            for (std::size_t j = 0; j + 1 < rd; ++j)
                for (std::size_t j2 = j + 1; j2 < rd; ++j2) {
                    const Complex minor = v[ki[i] | ri[j]] * v[ki[i2] | ri[j2]] -
                                          v[ki[i2] | ri[j]] * v[ki[i] | ri[j2]];
                    acc += std::norm(minor);
                }
    return 2.0 * acc;
}

/// Partial trace over the slots not listed in keep.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep,
                                   std::size_t total_qubits) {
    if (rho.dim() != (std::size_t{1} << total_qubits)) {
        throw std::invalid_argument("density matrix dimension is not 2^total_qubits");
    }
    const auto split = detail::make_split(keep, total_qubits);
    const std::size_t kd = std::size_t{1} << split.keep_pos.size();
    const std::size_t rd = std::size_t{1} << split.rest_pos.size();
    DensityMatrix out(kd);
    for (std::size_t i = 0; i < kd; ++i) {
        const std::size_t bi = detail::compose_index(split.keep_pos, i);
        for (std::size_t j = 0; j < kd; ++j) {
            const std::size_t bj = detail::compose_index(split.keep_pos, j);
            Complex s{};
            for (std::size_t r = 0; r < rd; ++r) {
                const std::size_t br = detail::compose_index(split.rest_pos, r);
                s += rho(bi | br, bj | br);
            }
            out(i, j) = s;
        }
    }
    return out;
}

}  // namespace qrsp::linalg
