// picard.hpp: the semigroup built from the iterated integral equation
//   τ⁰_t(x) = e^{tY†} x e^{tY},
//   τⁿ_t(x) = τ⁰_t(x) + ∫_0^t e^{(t-s)Y†} Φ(τⁿ⁻¹_s(x)) e^{(t-s)Y} ds,  Φ(x) = Σ L_k† x L_k

#pragma once

#include "qds/linalg.hpp"
#include "qds/model.hpp"
#include "qds/spectral.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace qds {

struct PicardTrace {
    std::vector<Matrix> iterates;   // τⁿ_t(x), n = 0..N
    std::vector<double> increments; // ‖τⁿ - τⁿ⁻¹‖ over the whole grid, n = 1..N
    double t = 0.0;
    int quadrature_steps = 0;
};

namespace detail {

class PicardGrid {
public:
    PicardGrid(const QuantumModel& m, double t, int steps)
        : steps_(steps), h_(t / steps), lindblad_(m.lindblad) {
        const Matrix y = drift_of(m);
        // Index k + 1 holds e^{k h Y} for k = -1..steps.
        for (int k = -1; k <= steps; ++k) exp_.push_back(expm(static_cast<double>(k) * h_ * y));
    }

    // e^{k h Y†} x e^{k h Y}
    Matrix conj(int k, const Matrix& x) const {
        const Matrix& e = exp_[static_cast<std::size_t>(k + 1)];
        return e.adjoint() * x * e;
    }

    Matrix phi(const Matrix& x) const {
        Matrix out = Matrix::Zero(x.rows(), x.cols());
        for (const auto& l : lindblad_) out += l.adjoint() * x * l;
        return out;
    }

    // τ⁰ on the grid.
    std::vector<Matrix> initial(const Matrix& x) const {
        std::vector<Matrix> g;
        for (int i = 0; i <= steps_; ++i) g.push_back(conj(i, x));
        return g;
    }

    // One Picard step on the whole grid. Node i integrates over [0, s_i]: composite
    // Simpson for even i, Simpson plus a final 3/8 panel for odd i ≥ 3, and the
    // quadratic-interpolation rule on [0, h] (which borrows node 2) for i = 1.
    std::vector<Matrix> step(const std::vector<Matrix>& prev, const std::vector<Matrix>& base,
                             bool hermitize) const {
        std::vector<Matrix> phis;
        phis.reserve(prev.size());
        for (const auto& p : prev) phis.push_back(phi(p));
        std::vector<Matrix> next(prev.size());
        const Index d = base.front().rows();
        for (int i = 0; i <= steps_; ++i) {
            auto f = [&](int j) { return conj(i - j, phis[static_cast<std::size_t>(j)]); };
            Matrix integral = Matrix::Zero(d, d);
            if (i == 1) {
                integral = h_ / 12.0 * (5.0 * f(0) + 8.0 * f(1) - f(2));
            } else if (i >= 2) {
                const int simpson_end = (i % 2 == 0) ? i : i - 3;
                if (simpson_end > 0) {
                    Matrix acc = f(0) + f(simpson_end);
                    for (int j = 1; j < simpson_end; ++j) acc += (j % 2 == 1 ? 4.0 : 2.0) * f(j);
                    integral += h_ / 3.0 * acc;
                }
                if (i % 2 == 1)
                    integral += 3.0 * h_ / 8.0 *
                                (f(i - 3) + 3.0 * f(i - 2) + 3.0 * f(i - 1) + f(i));
            }
            Matrix v = base[static_cast<std::size_t>(i)] + integral;
            next[static_cast<std::size_t>(i)] = hermitize ? hermitian_part(v) : v;
        }
        return next;
    }

private:
    int steps_;
    double h_;
    std::vector<Matrix> lindblad_;
    std::vector<Matrix> exp_;
};

inline void check_picard_inputs(const QuantumModel& m, const Matrix& x, double t, int steps,
                                const Tolerances& tol) {
    if (m.kind != ModelKind::lindblad)
        throw StructuralError("Picard scheme is continuous-time only");
    if (x.rows() != m.dim || x.cols() != m.dim)
        throw StructuralError("picard: operator dimension does not match model");
    if (t < 0.0) throw std::invalid_argument("negative time");
    if (!is_hermitian(x, tol.alg_tol)) throw std::invalid_argument("picard: x must be hermitian");
    if (steps < 8 || steps % 2 != 0)
        throw std::invalid_argument("picard: steps must be even and at least 8");
    require_valid(m, tol);
}

inline double grid_gap(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    double g = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, op_norm(a[i] - b[i]));
    return g;
}

} // namespace detail

// τ⁰..τⁿ at time t; each iterate reuses the previous one tabulated on the grid.
inline PicardTrace picard_iterate(const QuantumModel& m, const Matrix& x, double t, int n,
                                  int steps, const Tolerances& tol = {}) {
    detail::check_picard_inputs(m, x, t, steps, tol);
    if (n < 0) throw std::invalid_argument("picard: negative iteration count");
    const detail::PicardGrid grid(m, t, steps);
    const Matrix xh = hermitian_part(x);
    const std::vector<Matrix> base = grid.initial(xh);
    PicardTrace trace;
    trace.t = t;
    trace.quadrature_steps = steps;
    std::vector<Matrix> cur = base;
    trace.iterates.push_back(cur.back());
    for (int k = 1; k <= n; ++k) {
        std::vector<Matrix> next = grid.step(cur, base, true);
        trace.increments.push_back(detail::grid_gap(next, cur));
        cur = std::move(next);
        trace.iterates.push_back(cur.back());
    }
    return trace;
}

struct PicardLimit {
    Matrix value;
    int iterations = 0;
    double last_gap = 0.0;
    double equation_residual = 0.0;    // one further application of the integral map
    double exponential_difference = 0.0; // ‖value - evolve_heisenberg(x, t)‖
    double quadrature_bound = std::numeric_limits<double>::quiet_NaN(); // Richardson estimate
    PicardTrace trace;
};

namespace detail {

struct FixedPoint {
    std::vector<Matrix> grid;
    PicardTrace trace;
    int iterations = 0;
    double last_gap = 0.0;
    double residual = 0.0;
};

inline FixedPoint picard_fixed_point(const QuantumModel& m, const Matrix& x, double t,
                                     double tol_gap, int max_n, int steps) {
    const PicardGrid grid(m, t, steps);
    const Matrix xh = hermitian_part(x);
    const std::vector<Matrix> base = grid.initial(xh);
    FixedPoint fp;
    fp.trace.t = t;
    fp.trace.quadrature_steps = steps;
    fp.grid = base;
    fp.trace.iterates.push_back(base.back());
    fp.last_gap = std::numeric_limits<double>::infinity();
    while (fp.iterations < max_n) {
        std::vector<Matrix> next = grid.step(fp.grid, base, true);
        fp.last_gap = grid_gap(next, fp.grid);
        fp.grid = std::move(next);
        ++fp.iterations;
        fp.trace.increments.push_back(fp.last_gap);
        fp.trace.iterates.push_back(fp.grid.back());
        if (fp.last_gap <= tol_gap) break;
    }
    if (fp.last_gap > tol_gap)
        throw NumericalError("picard iteration did not converge within max_n",
                             {{"last_gap", fp.last_gap}});
    fp.residual = op_norm(grid.step(fp.grid, base, true).back() - fp.grid.back());
    return fp;
}

} // namespace detail

// Iterates until the grid-wide increment is ≤ tol_gap, then compares against the
// exponential route. The quadrature bound is the Richardson estimate from a run
// with half the steps (fourth-order rule).
inline PicardLimit picard_limit(const QuantumModel& m, const Matrix& x, double t, double tol_gap,
                                int max_n, int steps, const Tolerances& tol = {}) {
    detail::check_picard_inputs(m, x, t, steps, tol);
    if (!(tol_gap > 0.0)) throw std::invalid_argument("picard: tolerance must be positive");
    detail::FixedPoint fp = detail::picard_fixed_point(m, x, t, tol_gap, max_n, steps);
    PicardLimit out;
    out.value = fp.grid.back();
    out.iterations = fp.iterations;
    out.last_gap = fp.last_gap;
    out.equation_residual = fp.residual;
    out.trace = std::move(fp.trace);
    out.exponential_difference =
        op_norm(out.value - evolve_heisenberg(m, hermitian_part(x), Duration{t}, tol));
    const int half = steps / 2;
    if (half >= 8 && half % 2 == 0) {
        const detail::FixedPoint coarse =
            detail::picard_fixed_point(m, x, t, tol_gap, max_n, half);
        out.quadrature_bound = op_norm(coarse.grid.back() - out.value) / 15.0;
    }
    return out;
}

} // namespace qds
