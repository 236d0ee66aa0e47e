// ergodicity.hpp: invariant states, supports, positive recurrence and strong
// ergodicity (spectral criterion with a dynamic cross-check)

#pragma once

#include "qds/asymptotic.hpp"
#include "qds/resolution.hpp"
#include "qds/spectral.hpp"
#include "qds/states.hpp"

#include <optional>
#include <vector>

namespace qds {

class DensityMatrix {
public:
    DensityMatrix() = default;

    static DensityMatrix from_matrix(const Matrix& m, const Tolerances& tol = {}) {
        if (m.rows() != m.cols() || m.rows() == 0)
            throw StructuralError("density matrix must be square and non-empty");
        if (!m.allFinite()) throw StructuralError("density matrix has non-finite entries");
        if (hermiticity_residual(m) > tol.alg_tol)
            throw std::invalid_argument("density matrix is not hermitian");
        const Matrix h = hermitian_part(m);
        if (min_eigenvalue(h) < -tol.alg_tol)
            throw std::invalid_argument("density matrix is not positive semidefinite");
        if (std::abs(h.trace().real() - 1.0) > tol.alg_tol)
            throw std::invalid_argument("density matrix does not have unit trace");
        return DensityMatrix(h);
    }

    const Matrix& matrix() const { return m_; }
    Index dim() const { return m_.rows(); }

private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

inline double trace_distance(const Matrix& a, const Matrix& b) { return trace_norm(a - b); }

// ‖τ_*(ρ) - ρ‖ for steps, ‖L_*(ρ)‖ for generators.
inline double fixed_point_residual(const QuantumModel& m, const Matrix& rho,
                                   const Tolerances& tol = {}) {
    const Superoperator s = predual_superoperator(m, tol);
    const Matrix img = apply_map(s, rho, tol);
    return m.discrete() ? (img - rho).norm() : img.norm();
}

struct InvariantStates {
    std::vector<Matrix> basis;         // hermitian, Hilbert–Schmidt orthonormal
    std::vector<DensityMatrix> states; // extremal: one per recurrent projection
    std::vector<Projection> supports;
    std::vector<double> residuals;     // fixed-point residual of each state
};

// Extremal invariant states are the unique invariant states of the recurrent
// projections produced by resolve (seeded, hence deterministic).
inline InvariantStates invariant_states(const QuantumModel& m, std::uint64_t seed,
                                        const Tolerances& tol = {}) {
    InvariantStates out;
    out.basis = predual_fixed_space(m, tol);
    if (out.basis.empty()) throw NumericalError("predual fixed-point space is empty");
    ResolveOptions ro;
    const ResolutionResult res = resolve(m, seed, tol, ro);
    for (const auto& p : res.recurrent_projections) {
        const CornerState cs = corner_invariant_state(m, p, tol);
        if (cs.fixed_dim != 1 || !cs.faithful)
            throw NumericalError("recurrent projection without a unique faithful state");
        const double r = fixed_point_residual(m, cs.state, tol);
        if (r > tol.alg_tol)
            throw NumericalError("invariant state fails the fixed-point test",
                                 {{"fixed_point_residual", r}});
        out.states.push_back(DensityMatrix::from_matrix(cs.state, tol));
        out.supports.push_back(p);
        out.residuals.push_back(r);
    }
    return out;
}

// Range projection of ρ. If ρ is invariant, its support must be sub-harmonic.
inline Projection support_projection(const DensityMatrix& rho, const Tolerances& tol = {}) {
    return range_projection(rho.matrix(), tol);
}

inline Projection support_projection(const QuantumModel& m, const DensityMatrix& rho,
                                     const Tolerances& tol = {}) {
    const Projection p = support_projection(rho, tol);
    if (fixed_point_residual(m, rho.matrix(), tol) <= tol.alg_tol &&
        !subharmonic_residuals(m, p, tol).verdict)
        throw NumericalError("support of an invariant state is not sub-harmonic");
    return p;
}

// p must be minimal sub-harmonic. True iff an invariant state has support exactly p.
inline bool is_positive_recurrent(const QuantumModel& m, const Projection& p, Rng& rng,
                                  const Tolerances& tol = {}) {
    if (p.is_zero() || !subharmonic_residuals(m, p, tol).verdict)
        throw std::invalid_argument("is_positive_recurrent: projection is not sub-harmonic");
    if (minimal_subharmonic(m, p, rng, tol).rank() != p.rank())
        throw std::invalid_argument("is_positive_recurrent: projection is not minimal");
    return corner_invariant_state(m, p, tol).faithful;
}

struct StrongErgodicity {
    bool holds = false;
    bool spectral_holds = false;
    bool dynamic_holds = false;
    int ergodic_multiplicity = 0;
    int other_peripheral = 0; // peripheral eigenvalues other than the ergodic one
    double gap = 0.0;
    std::optional<DensityMatrix> phi0;
    Horizon horizon;
    double dynamic_distance = 0.0; // max trace distance at the horizon
};

struct StrongErgodicityOptions {
    int random_states = 5;
    double dynamic_tol = 1e-6;
    SpectralOptions spectral{};
};

// Spectral criterion (simple ergodic eigenvalue, nothing else peripheral) is
// authoritative; random initial states evolved to the convergence horizon must
// agree with it.
inline StrongErgodicity strong_ergodicity_check(const QuantumModel& m, Rng& rng,
                                                const Tolerances& tol = {},
                                                const StrongErgodicityOptions& opt = {}) {
    const Superoperator s = predual_superoperator(m, tol);
    const ErgodicProjection e = ergodic_projection(s, tol, opt.spectral);
    StrongErgodicity out;
    out.ergodic_multiplicity = e.multiplicity;
    const Complex erg = detail::ergodic_value(s.time_kind);
    for (auto z : e.eigenvalues)
        if (std::abs(z - erg) > opt.spectral.cluster_radius &&
            detail::on_boundary(z, s.time_kind, opt.spectral.cluster_radius))
            ++out.other_peripheral;
    out.gap = e.has_subperipheral ? e.gap : 0.0;
    out.spectral_holds = e.multiplicity == 1 && out.other_peripheral == 0;

    if (e.multiplicity == 1) {
        const auto basis = predual_fixed_space(m, tol);
        if (basis.size() == 1) {
            Matrix rho = basis.front() / basis.front().trace().real();
            out.phi0 = DensityMatrix::from_matrix(rho, tol);
        }
    }

    out.horizon = convergence_horizon(s.time_kind, e, m.dim, tol.conv_tol);
    std::vector<Matrix> finals;
    for (int k = 0; k < opt.random_states; ++k) {
        const Matrix g = random_gaussian(m.dim, m.dim, rng);
        Matrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        finals.push_back(evolve(s, rho, out.horizon, tol));
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < finals.size(); ++a) {
        if (out.phi0) worst = std::max(worst, trace_distance(finals[a], out.phi0->matrix()));
        for (std::size_t b = a + 1; b < finals.size(); ++b)
            worst = std::max(worst, trace_distance(finals[a], finals[b]));
    }
    out.dynamic_distance = worst;
    out.dynamic_holds = worst <= opt.dynamic_tol;
    if (out.dynamic_holds != out.spectral_holds)
        throw NumericalError("spectral and dynamic strong-ergodicity tests disagree",
                             {{"dynamic_distance", worst},
                              {"ergodic_multiplicity", static_cast<double>(e.multiplicity)},
                              {"other_peripheral", static_cast<double>(out.other_peripheral)}});
    out.holds = out.spectral_holds;
    return out;
}

struct ReducedErgodicity {
    bool full = false;
    bool reduced = false;
    bool y_is_one = false;
    bool consistent = true; // y = 1 implies full ⟺ reduced
};

// For p the support of an invariant state: when y = 1 the dynamics is strongly
// ergodic exactly when its compression to p is.
inline ReducedErgodicity reduced_ergodicity_equivalence(const QuantumModel& m,
                                                        const Projection& p, Rng& rng,
                                                        const Tolerances& tol = {}) {
    if (p.is_zero() || !subharmonic_residuals(m, p, tol).verdict ||
        !corner_invariant_state(m, p, tol).faithful)
        throw std::invalid_argument("projection is not the support of an invariant state");
    ReducedErgodicity out;
    out.full = strong_ergodicity_check(m, rng, tol).holds;
    out.reduced = strong_ergodicity_check(reduce_model(m, p, tol), rng, tol).holds;
    out.y_is_one = is_transient_complement(m, p, tol).transient;
    out.consistent = !out.y_is_one || out.full == out.reduced;
    return out;
}

} // namespace qds
