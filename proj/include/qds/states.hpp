// states.hpp: the predual fixed-point space and invariant states supported on a
// sub-harmonic projection

#pragma once

#include "qds/model.hpp"
#include "qds/projections.hpp"

#include <vector>

namespace qds {

// Hilbert–Schmidt orthonormal hermitian basis of {ρ : τ_*(ρ) = ρ} (steps) or
// {ρ : L_*(ρ) = 0} (generators). The space is closed under †, so its complex
// dimension equals the real dimension of its hermitian part.
inline std::vector<Matrix> predual_fixed_space(const QuantumModel& m, const Tolerances& tol = {}) {
    const Superoperator s = predual_superoperator(m, tol);
    const Index d = m.dim;
    Matrix shifted = s.matrix;
    if (m.discrete()) shifted -= identity(d * d);
    const Matrix kernel = null_space(shifted, tol.rank_tol);
    const Index k = kernel.cols();
    if (k == 0) return {};

    // Real coordinates (Re, Im) of the hermitian and anti-hermitian parts.
    const Complex i(0.0, 1.0);
    RealMatrix coords(2 * d * d, 2 * k);
    for (Index c = 0; c < k; ++c) {
        const Matrix b = unvec(kernel.col(c), d);
        const Matrix parts[2] = {hermitian_part(b), hermitian_part(-i * b)};
        for (int q = 0; q < 2; ++q) {
            const Vector v = vec(parts[q]);
            coords.col(2 * c + q) << v.real(), v.imag();
        }
    }
    Eigen::JacobiSVD<RealMatrix> svd(coords, Eigen::ComputeThinU);
    std::vector<Matrix> basis;
    for (Index c = 0; c < k; ++c) {
        const Eigen::VectorXd u = svd.matrixU().col(c);
        Vector v(d * d);
        v.real() = u.head(d * d);
        v.imag() = u.tail(d * d);
        basis.push_back(hermitian_part(unvec(v, d)));
    }
    return basis;
}

inline Matrix absolute_value(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
    return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() *
           es.eigenvectors().adjoint();
}

// The invariant state of maximal support: Σ |B_i| over a hermitian basis of the
// fixed space, trace-normalized. Positive and negative parts of a hermitian fixed
// point of a trace-preserving positive map are themselves fixed.
inline Matrix maximal_invariant_state(const QuantumModel& m, const Tolerances& tol = {}) {
    const auto basis = predual_fixed_space(m, tol);
    if (basis.empty()) throw NumericalError("predual has no fixed point");
    Matrix acc = Matrix::Zero(m.dim, m.dim);
    for (const auto& b : basis) acc += absolute_value(b);
    return hermitian_part(acc / acc.trace().real());
}

struct CornerState {
    Matrix state;       // d×d, supported in range(p)
    int fixed_dim = 0;  // dimension of the fixed space of the compressed dynamics
    bool faithful = false; // support equals p
    double min_relative_eig = 0.0;
};

// Invariant state of maximal support among those supported in range(p), for
// sub-harmonic p. p is minimal iff fixed_dim == 1 and the state is faithful.
inline CornerState corner_invariant_state(const QuantumModel& m, const Projection& p,
                                          const Tolerances& tol = {}) {
    const QuantumModel reduced = reduce_model(m, p, tol);
    CornerState out;
    out.fixed_dim = static_cast<int>(predual_fixed_space(reduced, tol).size());
    const Matrix rho = maximal_invariant_state(reduced, tol);
    const Eigen::VectorXd ev = hermitian_eigenvalues(rho);
    out.min_relative_eig = ev(0) / ev(ev.size() - 1);
    out.faithful = out.min_relative_eig > tol.rank_tol;
    const Matrix v = p.basis();
    out.state = hermitian_part(v * rho * v.adjoint());
    return out;
}

} // namespace qds
