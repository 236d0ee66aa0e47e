// projections.hpp: projection type, sub-harmonic/harmonic tests, range projections,
// and compression of the dynamics onto a sub-harmonic corner

#pragma once

#include "qds/linalg.hpp"
#include "qds/model.hpp"
#include "qds/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace qds {

// Inputs within this distance of a projection are snapped to the nearest one.
inline constexpr double kProjectionSnapTol = 1e-6;

class Projection {
public:
    Projection() = default;

    static Projection from_matrix(const Matrix& m, double snap_tol = kProjectionSnapTol) {
        if (m.rows() != m.cols()) throw StructuralError("projection must be square");
        if (!m.allFinite()) throw StructuralError("projection has non-finite entries");
        const double herm = hermiticity_residual(m);
        const Matrix h = hermitian_part(m);
        const double idem = (h * h - h).norm();
        if (herm == 0.0 && idem == 0.0) return Projection(h, count_rank(h));
        if (herm <= snap_tol && idem <= snap_tol) return snap(h);
        throw StructuralError("not a projection: hermiticity residual " + std::to_string(herm) +
                              ", idempotency residual " + std::to_string(idem));
    }

    // Orthogonal projection onto the span of orthonormal columns.
    static Projection onto(const Matrix& basis) {
        return Projection(projector_onto(basis), static_cast<int>(basis.cols()));
    }

    static Projection zero(Index d) { return Projection(Matrix::Zero(d, d), 0); }
    static Projection identity(Index d) {
        return Projection(qds::identity(d), static_cast<int>(d));
    }

    const Matrix& matrix() const { return m_; }
    int rank() const { return rank_; }
    Index dim() const { return m_.rows(); }
    bool is_zero() const { return rank_ == 0; }

    Projection complement() const {
        return Projection(qds::identity(dim()) - m_, static_cast<int>(dim()) - rank_);
    }

    // Orthonormal basis of the range. Diagonal projections yield coordinate vectors
    // in index order; otherwise eigenvectors in solver order.
    Matrix basis() const {
        const Index d = dim();
        if (is_diagonal(m_, 1e-13)) {
            Matrix b(d, rank_);
            Index c = 0;
            for (Index i = 0; i < d && c < rank_; ++i)
                if (m_(i, i).real() >= 0.5) {
                    b.col(c).setZero();
                    b(i, c++) = 1.0;
                }
            return b.leftCols(c);
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
        return es.eigenvectors().rightCols(rank_);
    }

private:
    Projection(Matrix m, int rank) : m_(std::move(m)), rank_(rank) {}

    static int count_rank(const Matrix& h) {
        if (h.size() == 0) return 0;
        const Eigen::VectorXd ev = hermitian_eigenvalues(h);
        return static_cast<int>((ev.array() >= 0.5).count());
    }

    static Projection snap(const Matrix& h) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        Matrix b(h.rows(), 0);
        for (Index i = 0; i < h.rows(); ++i)
            if (es.eigenvalues()(i) >= 0.5)
                detail::append_if_new(b, es.eigenvectors().col(i), 1.0, 0.5);
        return onto(b);
    }

    Matrix m_;
    int rank_ = 0;
};

struct SubharmonicWitness {
    std::string op; // "kraus", "drift" or "lindblad"
    int index = 0;
    double residual = 0.0;
};

struct SubharmonicResult {
    bool verdict = false;
    double residual = 0.0;                    // max_k ‖(1-p) G_k p‖
    std::vector<SubharmonicWitness> witnesses; // operators with residual > alg_tol
    double order_min_eig = 0.0;               // min eig(τ_Δ(p) - p), diagnostic only
};

namespace detail {

inline void require_same_dim(const QuantumModel& m, const Projection& p) {
    if (p.dim() != m.dim) throw StructuralError("projection dimension does not match model");
}

} // namespace detail

// Algebraic criterion only: ‖(1-p) l_k p‖ for steps, ‖(1-p) Y p‖ and ‖(1-p) L_k p‖
// for generators.
inline SubharmonicResult subharmonic_residuals(const QuantumModel& m, const Projection& p,
                                               const Tolerances& tol = {}) {
    detail::require_same_dim(m, p);
    SubharmonicResult r;
    const Matrix& pm = p.matrix();
    const Matrix qm = identity(m.dim) - pm;
    auto visit = [&](const Matrix& g, const std::string& op, int index) {
        const double res = (qm * g * pm).norm();
        r.residual = std::max(r.residual, res);
        if (res > tol.alg_tol) r.witnesses.push_back({op, index, res});
    };
    if (m.discrete()) {
        for (std::size_t k = 0; k < m.kraus.size(); ++k)
            visit(m.kraus[k], "kraus", static_cast<int>(k));
    } else {
        visit(drift_of(m), "drift", 0);
        for (std::size_t k = 0; k < m.lindblad.size(); ++k)
            visit(m.lindblad[k], "lindblad", static_cast<int>(k));
    }
    r.verdict = r.residual <= tol.alg_tol;
    return r;
}

// min eig(τ_Δ(p) - p): one step for discrete models, the minimum over a few
// incommensurate Δ for generators (a single Δ can hit a recurrence time).
inline double order_test_min_eig(const QuantumModel& m, const Projection& p,
                                 const Tolerances& tol = {}) {
    detail::require_same_dim(m, p);
    const Superoperator s = heisenberg_superoperator(m, tol);
    const Matrix& pm = p.matrix();
    if (m.discrete()) return min_eigenvalue(apply_map(s, pm, tol) - pm);
    const double scale = std::max(1.0, op_norm(s.matrix));
    double worst = std::numeric_limits<double>::infinity();
    for (double delta : {0.1, 0.7, 2.3})
        worst = std::min(worst, min_eigenvalue(evolve(s, pm, Duration{delta / scale}, tol) - pm));
    return worst;
}

// Algebraic verdict, cross-checked against the operator-order test.
inline SubharmonicResult is_subharmonic(const QuantumModel& m, const Projection& p,
                                        const Tolerances& tol = {}) {
    SubharmonicResult r = subharmonic_residuals(m, p, tol);
    r.order_min_eig = order_test_min_eig(m, p, tol);
    if (r.verdict && r.order_min_eig < -10.0 * tol.alg_tol)
        throw NumericalError("sub-harmonic criteria disagree: algebraic test passes but "
                             "τ_Δ(p) - p is not positive",
                             {{"algebraic_residual", r.residual}, {"order_min_eig", r.order_min_eig}});
    // The order defect is quadratic in the algebraic residual, so only a gross
    // residual is required to be visible there.
    const double gross = 100.0 * std::sqrt(tol.alg_tol * static_cast<double>(m.dim));
    if (!r.verdict && r.residual > gross && r.order_min_eig >= -tol.alg_tol)
        throw NumericalError("sub-harmonic criteria disagree: algebraic test fails but "
                             "τ_Δ(p) ≥ p",
                             {{"algebraic_residual", r.residual}, {"order_min_eig", r.order_min_eig}});
    return r;
}

// ‖τ(p) - p‖ for steps, ‖L(p)‖ for generators.
inline double harmonic_residual(const QuantumModel& m, const Projection& p,
                                const Tolerances& tol = {}) {
    detail::require_same_dim(m, p);
    const Superoperator s = heisenberg_superoperator(m, tol);
    const Matrix img = apply_map(s, p.matrix(), tol);
    return m.discrete() ? (img - p.matrix()).norm() : img.norm();
}

inline bool is_harmonic(const QuantumModel& m, const Projection& p, const Tolerances& tol = {}) {
    return harmonic_residual(m, p, tol) <= tol.alg_tol;
}

// Projection onto span of eigenvectors of a PSD x with eigenvalue > rank_tol·λ_max.
inline Projection range_projection(const Matrix& x, const Tolerances& tol = {}) {
    if (x.rows() != x.cols()) throw StructuralError("range_projection: matrix is not square");
    const double scale = std::max(1.0, op_norm(x));
    if (hermiticity_residual(x) > tol.alg_tol * scale)
        throw std::invalid_argument("range_projection: matrix is not hermitian");
    const Index d = x.rows();
    if (is_diagonal(x, 0.0)) {
        const Eigen::VectorXd diag = x.diagonal().real();
        const double top = d > 0 ? diag.maxCoeff() : 0.0;
        if (d > 0 && diag.minCoeff() < -tol.alg_tol * scale)
            throw std::invalid_argument("range_projection: matrix is not positive semidefinite");
        Matrix b(d, 0);
        for (Index i = 0; i < d; ++i)
            if (diag(i) > tol.rank_tol * top && diag(i) > 0.0) {
                b.conservativeResize(Eigen::NoChange, b.cols() + 1);
                b.col(b.cols() - 1) = Vector::Unit(d, i);
            }
        return Projection::onto(b);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(x));
    const auto& ev = es.eigenvalues();
    if (ev(0) < -tol.alg_tol * scale)
        throw std::invalid_argument("range_projection: matrix is not positive semidefinite");
    const double top = ev(d - 1);
    Matrix b(d, 0);
    for (Index i = d - 1; i >= 0; --i)
        if (ev(i) > tol.rank_tol * top && ev(i) > 0.0) {
            b.conservativeResize(Eigen::NoChange, b.cols() + 1);
            b.col(b.cols() - 1) = es.eigenvectors().col(i);
        }
    return Projection::onto(b);
}

// The compressed dynamics x ↦ p τ(x) p written in an orthonormal basis of range(p).
// Refuses non-sub-harmonic p unless allow_sub_markov, in which case the result is
// flagged sub_markov (it loses unitality on the part that leaks out).
inline QuantumModel reduce_model(const QuantumModel& m, const Projection& p,
                                 const Tolerances& tol = {}, bool allow_sub_markov = false) {
    detail::require_same_dim(m, p);
    if (p.is_zero()) throw std::invalid_argument("reduce_model: zero projection");
    const bool sub = subharmonic_residuals(m, p, tol).verdict;
    if (!sub && !allow_sub_markov)
        throw std::invalid_argument("reduction requires sub-harmonic corner");

    if (m.kind == ModelKind::stochastic && is_diagonal(p.matrix(), tol.alg_tol)) {
        std::vector<Index> states;
        for (Index i = 0; i < m.dim; ++i)
            if (p.matrix()(i, i).real() >= 0.5) states.push_back(i);
        const Index r = static_cast<Index>(states.size());
        RealMatrix pr(r, r);
        for (Index a = 0; a < r; ++a)
            for (Index b = 0; b < r; ++b) pr(a, b) = m.stochastic(states[a], states[b]);
        return make_stochastic_model(std::move(pr), !sub);
    }

    const Matrix v = p.basis();
    auto compress = [&](const Matrix& x) -> Matrix { return v.adjoint() * x * v; };
    QuantumModel out;
    if (m.discrete()) {
        std::vector<Matrix> ops;
        for (const auto& l : m.kraus) {
            Matrix c = compress(l);
            if (c.norm() > 0.0) ops.push_back(std::move(c));
        }
        if (ops.empty()) ops.push_back(Matrix::Zero(v.cols(), v.cols()));
        out = make_kraus_model(std::move(ops));
    } else {
        std::vector<Matrix> ls;
        for (const auto& l : m.lindblad) ls.push_back(compress(l));
        out = make_lindblad_model(compress(m.hamiltonian), std::move(ls), compress(drift_of(m)));
    }
    out.sub_markov = !sub;
    return out;
}

} // namespace qds
