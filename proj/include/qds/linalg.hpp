// linalg.hpp: dense helpers: vectorization, Kronecker products, null spaces,
// invariant-subspace closures, random unitaries, matrix exponential

#pragma once

#include "qds/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qds {

// Column-stacking vectorization: vec(A X B) = (B^T ⊗ A) vec(X).
inline Vector vec(const Matrix& x) {
    return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unvec(const Vector& v, Index d) {
    if (v.size() != d * d)
        throw StructuralError("unvec: vector length is not d*d");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k = Eigen::kroneckerProduct(a, b);
    return k;
}

inline Matrix identity(Index d) { return Matrix::Identity(d, d); }

inline Matrix hermitian_part(const Matrix& x) { return 0.5 * (x + x.adjoint()); }

inline double hermiticity_residual(const Matrix& x) { return (x - x.adjoint()).norm(); }

inline bool is_hermitian(const Matrix& x, double tol) { return hermiticity_residual(x) <= tol; }

// Largest singular value.
inline double op_norm(const Matrix& x) {
    if (x.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(x);
    return svd.singularValues()(0);
}

inline double trace_norm(const Matrix& x) {
    if (x.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(x);
    return svd.singularValues().sum();
}

// Ascending eigenvalues of the hermitian part of x.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& x) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(x), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& x) {
    if (x.size() == 0) return 0.0;
    return hermitian_eigenvalues(x)(0);
}

inline bool is_diagonal(const Matrix& x, double tol) {
    Matrix off = x;
    off.diagonal().setZero();
    return off.norm() <= tol;
}

// Orthonormal basis of ker(m): right singular vectors with σ ≤ rel_tol·max(σ_max, 1).
// The floor keeps a roundoff-sized matrix from counting as full rank.
inline Matrix null_space(const Matrix& m, double rel_tol) {
    const Index n = m.cols();
    if (m.rows() == 0) return identity(n);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double thr = rel_tol * std::max(s.size() > 0 ? s(0) : 0.0, 1.0);
    Index rank = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > thr) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

inline Matrix projector_onto(const Matrix& orthonormal_basis) {
    return orthonormal_basis * orthonormal_basis.adjoint();
}

namespace detail {

// Appends w to the orthonormal column set q if it has a component of relative
// size > rel_tol outside span(q). Two Gram-Schmidt passes.
inline bool append_if_new(Matrix& q, Vector w, double scale, double rel_tol) {
    if (!(scale > 0.0)) return false;
    for (int pass = 0; pass < 2; ++pass)
        if (q.cols() > 0) w -= q * (q.adjoint() * w);
    const double nrm = w.norm();
    if (nrm <= rel_tol * scale) return false;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = w / nrm;
    return true;
}

} // namespace detail

// Smallest subspace containing span(start) and invariant under every generator.
// Returns an orthonormal basis (columns).
inline Matrix invariant_closure(const Matrix& start, const std::vector<Matrix>& generators,
                                double rel_tol) {
    const Index d = start.rows();
    Matrix q(d, 0);
    for (Index j = 0; j < start.cols(); ++j)
        detail::append_if_new(q, start.col(j), start.col(j).norm(), rel_tol);

    std::vector<double> scales;
    scales.reserve(generators.size());
    for (const auto& g : generators) scales.push_back(op_norm(g));

    for (Index k = 0; k < q.cols() && q.cols() < d; ++k) {
        for (std::size_t g = 0; g < generators.size(); ++g) {
            Vector w = generators[g] * q.col(k);
            detail::append_if_new(q, std::move(w), scales[g], rel_tol);
            if (q.cols() == d) break;
        }
    }
    return q;
}

inline Matrix random_gaussian(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            m(i, j) = Complex(re, im);
        }
    return m;
}

inline Complex random_complex(Rng& rng) { return random_gaussian(1, 1, rng)(0, 0); }

// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
inline Matrix random_unitary(Index n, Rng& rng) {
    if (n == 0) return Matrix(0, 0);
    Matrix g = random_gaussian(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < n; ++i) {
        const double a = std::abs(r(i, i));
        if (a > 0.0) q.col(i) *= r(i, i) / a;
    }
    return q;
}

inline Matrix expm(const Matrix& m) {
    Matrix e = m.exp();
    return e;
}

inline Matrix matrix_power(Matrix base, long n) {
    if (n < 0) throw std::invalid_argument("matrix_power: negative exponent");
    Matrix result = identity(base.rows());
    while (n > 0) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return result;
}

} // namespace qds
