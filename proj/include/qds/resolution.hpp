// resolution.hpp: reachability closures, minimal sub-harmonic projections,
// transience certificates, the recurrent/metastable resolution and irreducibility

#pragma once

#include "qds/asymptotic.hpp"
#include "qds/classical.hpp"
#include "qds/linalg.hpp"
#include "qds/model.hpp"
#include "qds/projections.hpp"
#include "qds/states.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qds {

struct ReachabilityClosure {
    Matrix basis; // orthonormal columns
    int dim = 0;
};

// Smallest subspace containing range(p) and invariant under the adjoint
// generators (l_k† for steps, Y† and L_k† for generators). For sub-harmonic p
// this is range(y), so dim == d exactly when y is injective.
inline ReachabilityClosure reachability_closure(const QuantumModel& m, const Projection& p,
                                                const Tolerances& tol = {}) {
    detail::require_same_dim(m, p);
    ReachabilityClosure out;
    out.basis = invariant_closure(p.basis(), adjoint_generators(m), tol.rank_tol);
    out.dim = static_cast<int>(out.basis.cols());
    return out;
}

struct TransienceCertificate {
    bool transient = false;   // y = 1
    bool metastable = false;  // y injective
    double min_eig_y = 0.0;
    int closure_dim = 0;
    double distance_to_identity = 0.0; // ‖y - 1‖
    Matrix y;
};

// Certificates for the complement 1 - p of a sub-harmonic p. Injectivity is
// decided twice (closure dimension and spectrum of y) and the two must agree.
inline TransienceCertificate is_transient_complement(const QuantumModel& m, const Projection& p,
                                                     const Tolerances& tol = {}) {
    const AsymptoticResult a = asymptotic_operator(m, p, tol);
    TransienceCertificate c;
    c.y = a.y;
    c.min_eig_y = min_eigenvalue(a.y);
    c.closure_dim = reachability_closure(m, p, tol).dim;
    c.distance_to_identity = (a.y - identity(m.dim)).norm();
    const bool by_closure = c.closure_dim == m.dim;
    const bool by_spectrum = c.min_eig_y > tol.rank_tol;
    if (by_closure != by_spectrum)
        throw NumericalError("injectivity certificates disagree",
                             {{"min_eig_y", c.min_eig_y},
                              {"closure_dim", static_cast<double>(c.closure_dim)}});
    c.metastable = by_closure;
    c.transient = c.distance_to_identity <= tol.alg_tol;
    if (c.metastable && !c.transient)
        throw NumericalError("metastable complement without y = 1",
                             {{"distance_to_identity", c.distance_to_identity},
                              {"min_eig_y", c.min_eig_y}});
    return c;
}

struct MinimalSearchOptions {
    int max_retries = 8;     // reseeded restarts before giving up
    int probe_vectors = 8;   // random interior vectors used to verify minimality
};

namespace detail {

// The closure of span(v) under the forward generators; for v inside a sub-harmonic
// range it is again a sub-harmonic range.
inline Matrix forward_closure(const Vector& v, const std::vector<Matrix>& gens, double rank_tol) {
    Matrix start(v.size(), 1);
    start.col(0) = v;
    return invariant_closure(start, gens, rank_tol);
}

// Minimality certificate for a sub-harmonic range V: every probe vector regenerates
// V, and the compressed dynamics has a unique, faithful invariant state.
inline bool certify_minimal(const QuantumModel& m, const Matrix& v, Rng& rng,
                            const Tolerances& tol, const MinimalSearchOptions& opt) {
    const Projection p = Projection::onto(v);
    if (!subharmonic_residuals(m, p, tol).verdict) return false;
    const auto gens = forward_generators(m);
    for (int k = 0; k < opt.probe_vectors; ++k) {
        const Vector probe = v * random_gaussian(v.cols(), 1, rng).col(0);
        if (forward_closure(probe, gens, tol.rank_tol).cols() != v.cols()) return false;
    }
    const CornerState cs = corner_invariant_state(m, p, tol);
    return cs.fixed_dim == 1 && cs.faithful;
}

} // namespace detail

// A minimal sub-harmonic projection below `within`. A random rotation of the
// starting basis plus eigenvectors of a random combination of the generators
// (compressed to the current range) seed forward closures; whenever one is smaller
// the search recurses into it. The seed selects among non-unique answers.
inline Projection minimal_subharmonic(const QuantumModel& m, const Projection& within, Rng& rng,
                                      const Tolerances& tol = {},
                                      const MinimalSearchOptions& opt = {}) {
    detail::require_same_dim(m, within);
    if (within.is_zero()) throw std::invalid_argument("minimal_subharmonic: zero projection");
    if (!subharmonic_residuals(m, within, tol).verdict)
        throw std::invalid_argument("minimal_subharmonic: `within` is not sub-harmonic");
    const auto gens = forward_generators(m);

    Matrix v = within.basis();
    for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
        v = v * random_unitary(v.cols(), rng);
        while (v.cols() > 1) {
            Matrix a = Matrix::Zero(m.dim, m.dim);
            for (const auto& g : gens) a += random_complex(rng) * g;
            Eigen::ComplexEigenSolver<Matrix> es(v.adjoint() * a * v);
            Matrix best = v;
            for (Index j = 0; j < es.eigenvectors().cols(); ++j) {
                const Vector w = v * es.eigenvectors().col(j);
                Matrix c = detail::forward_closure(w.normalized(), gens, tol.rank_tol);
                if (c.cols() < best.cols()) best = std::move(c);
            }
            if (best.cols() == v.cols()) break;
            v = best * random_unitary(best.cols(), rng);
        }
        if (detail::certify_minimal(m, v, rng, tol, opt)) return Projection::onto(v);
    }
    throw NumericalError("minimality not certified after " + std::to_string(opt.max_retries) +
                         " retries");
}

enum class Label {
    positive_recurrent,
    null_recurrent,
    metastable,
    transient,
    subharmonic_nonminimal,
    not_subharmonic
};

inline std::string to_string(Label l) {
    switch (l) {
    case Label::positive_recurrent: return "positive_recurrent";
    case Label::null_recurrent: return "null_recurrent";
    case Label::metastable: return "metastable";
    case Label::transient: return "transient";
    case Label::subharmonic_nonminimal: return "subharmonic_nonminimal";
    case Label::not_subharmonic: return "not_subharmonic";
    }
    return "?";
}

struct Certificate {
    double subharmonic_residual = 0.0;
    std::optional<double> order_min_eig;
    std::optional<Matrix> invariant_state;
    std::optional<int> closure_dim;
    std::optional<double> min_eig_y;
    std::optional<bool> complement_metastable;
    std::optional<bool> complement_transient;
    std::optional<int> minimal_rank; // rank of the minimal projection found below p
};

struct Classification {
    Label label = Label::not_subharmonic;
    Certificate certificate;
};

inline Classification classify_projection(const QuantumModel& m, const Projection& p, Rng& rng,
                                          const Tolerances& tol = {}) {
    detail::require_same_dim(m, p);
    if (p.is_zero()) throw std::invalid_argument("classify_projection: zero projection");
    Classification c;
    const SubharmonicResult sub = is_subharmonic(m, p, tol);
    c.certificate.subharmonic_residual = sub.residual;
    c.certificate.order_min_eig = sub.order_min_eig;
    if (!sub.verdict) {
        c.label = Label::not_subharmonic;
        return c;
    }
    const TransienceCertificate tc = is_transient_complement(m, p, tol);
    c.certificate.closure_dim = tc.closure_dim;
    c.certificate.min_eig_y = tc.min_eig_y;
    c.certificate.complement_metastable = tc.metastable;
    c.certificate.complement_transient = tc.transient;

    const Projection q = minimal_subharmonic(m, p, rng, tol);
    c.certificate.minimal_rank = q.rank();
    if (q.rank() < p.rank()) {
        c.label = Label::subharmonic_nonminimal;
        return c;
    }
    const CornerState cs = corner_invariant_state(m, p, tol);
    if (!cs.faithful)
        throw NumericalError("null recurrent projection in finite dimension: numerical failure",
                             {{"min_relative_eig", cs.min_relative_eig}});
    c.certificate.invariant_state = cs.state;
    c.label = Label::positive_recurrent;
    return c;
}

struct ResolveOptions {
    // Stochastic models: compare against the graph classification and throw on mismatch.
    bool classical_cross_check = true;
    // Snap diagonal-looking output to exact diagonal projections (always on for
    // stochastic models; set it for Kraus embeddings of chains).
    bool diagonal_snap = false;
    MinimalSearchOptions search{};
};

struct ResolutionResult {
    std::vector<Projection> recurrent_projections;
    Projection metastable_remainder;
    Matrix y_total;
    std::vector<Classification> certificates;
    Classification remainder_certificate; // label transient (y_total = 1)
    std::uint64_t seed = kDefaultSeed;
    std::vector<std::string> flags; // non-fatal observations, e.g. undiagonal output on chains
    std::map<std::string, double> residuals;
};

namespace detail {

// Round to a 1e-9 grid so the ordering is insensitive to last-bit noise.
inline long long rounded(double x) { return std::llround(x * 1e9); }

// Descending rank, then descending lexicographic order of rounded row-major entries.
inline bool projection_order(const Projection& a, const Projection& b) {
    if (a.rank() != b.rank()) return a.rank() > b.rank();
    const Index d = a.dim();
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            const Complex x = a.matrix()(i, j), y = b.matrix()(i, j);
            const long long xr = rounded(x.real()), yr = rounded(y.real());
            if (xr != yr) return xr > yr;
            const long long xi = rounded(x.imag()), yi = rounded(y.imag());
            if (xi != yi) return xi > yi;
        }
    return false;
}

inline double offdiagonal_mass(const Matrix& x) {
    Matrix o = x;
    o.diagonal().setZero();
    return o.norm();
}

inline Projection diagonal_projection(const Matrix& x) {
    const Index d = x.rows();
    Matrix b(d, 0);
    for (Index i = 0; i < d; ++i)
        if (x(i, i).real() >= 0.5) {
            b.conservativeResize(Eigen::NoChange, b.cols() + 1);
            b.col(b.cols() - 1) = Vector::Unit(d, i);
        }
    return Projection::onto(b);
}

inline std::vector<int> diagonal_support(const Projection& p) {
    std::vector<int> s;
    for (Index i = 0; i < p.dim(); ++i)
        if (p.matrix()(i, i).real() >= 0.5) s.push_back(static_cast<int>(i));
    return s;
}

} // namespace detail

// Supports (indices with diagonal ≥ ½) of a resolution of an embedded chain.
inline std::vector<std::vector<int>> recurrent_supports(const ResolutionResult& r) {
    std::vector<std::vector<int>> out;
    for (const auto& p : r.recurrent_projections) out.push_back(detail::diagonal_support(p));
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<int> remainder_support(const ResolutionResult& r) {
    return detail::diagonal_support(r.metastable_remainder);
}

inline ResolutionResult resolve(const QuantumModel& m, std::uint64_t seed,
                                const Tolerances& tol = {}, const ResolveOptions& opt = {}) {
    tol.validate();
    require_valid(m, tol);
    Rng rng(seed);
    const Index d = m.dim;
    const bool chain = m.kind == ModelKind::stochastic || opt.diagonal_snap;
    ResolutionResult out;
    out.seed = seed;

    Projection r = Projection::identity(d);
    Matrix sum = Matrix::Zero(d, d);
    Matrix y;
    int iterations = 0;
    while (!r.is_zero()) {
        if (++iterations > d) throw NumericalError("resolve: more than d iterations");
        Projection p = minimal_subharmonic(m, r, rng, tol, opt.search);
        if (chain) {
            const double off = detail::offdiagonal_mass(p.matrix());
            if (off <= tol.alg_tol) {
                p = detail::diagonal_projection(p.matrix());
            } else {
                out.flags.push_back("recurrent projection " +
                                    std::to_string(out.recurrent_projections.size()) +
                                    " is not diagonal (off-diagonal mass " + std::to_string(off) +
                                    ")");
            }
        }
        sum += p.matrix();
        out.recurrent_projections.push_back(p);
        const Projection psum = Projection::from_matrix(sum);
        y = asymptotic_operator(m, psum, tol).y;
        Projection q = range_projection(y, tol);
        if (chain && detail::offdiagonal_mass(q.matrix()) <= tol.alg_tol)
            q = detail::diagonal_projection(q.matrix());
        const int closure = reachability_closure(m, psum, tol).dim;
        if (closure != q.rank())
            throw NumericalError("range of y and reachability closure differ in dimension",
                                 {{"range_rank", q.rank()}, {"closure_dim", closure}});
        r = q.complement();
    }
    out.y_total = y;
    out.metastable_remainder = Projection::from_matrix(identity(d) - sum);

    // Invariants: orthogonality, commutation, completeness, injective y_total.
    double ortho = 0.0, comm = 0.0;
    const auto& ps = out.recurrent_projections;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j) {
            ortho = std::max(ortho, (ps[i].matrix() * ps[j].matrix()).norm());
            comm = std::max(comm, (ps[i].matrix() * ps[j].matrix() -
                                   ps[j].matrix() * ps[i].matrix()).norm());
        }
    const double completeness =
        (sum + out.metastable_remainder.matrix() - identity(d)).norm();
    const double min_eig = min_eigenvalue(out.y_total);
    out.residuals = {{"orthogonality", ortho},
                     {"commutation", comm},
                     {"completeness", completeness},
                     {"min_eig_y_total", min_eig}};
    if (ortho > tol.alg_tol || comm > tol.alg_tol || completeness > tol.alg_tol ||
        !(min_eig > tol.rank_tol))
        throw NumericalError("resolution invariants violated", out.residuals);

    std::sort(out.recurrent_projections.begin(), out.recurrent_projections.end(),
              detail::projection_order);
    for (const auto& p : out.recurrent_projections) {
        Classification c = classify_projection(m, p, rng, tol);
        if (c.label != Label::positive_recurrent)
            throw NumericalError("resolved projection is not positive recurrent: " +
                                 to_string(c.label));
        out.certificates.push_back(std::move(c));
    }

    Classification rc;
    rc.label = Label::transient;
    rc.certificate.min_eig_y = min_eig;
    rc.certificate.closure_dim = static_cast<int>(d);
    rc.certificate.complement_metastable = true;
    rc.certificate.complement_transient = (out.y_total - identity(d)).norm() <= tol.alg_tol;
    if (!*rc.certificate.complement_transient)
        throw NumericalError("metastable remainder is not transient",
                             {{"distance_to_identity", (out.y_total - identity(d)).norm()}});
    out.remainder_certificate = rc;

    if (m.kind == ModelKind::stochastic && opt.classical_cross_check) {
        const ChainClassification oracle = classical_classify(m.stochastic);
        if (recurrent_supports(out) != oracle.closed_classes ||
            remainder_support(out) != oracle.transient_states)
            throw NumericalError("resolution disagrees with the chain's closed classes");
    }
    return out;
}

// Dimension of {x : [x, G] = 0} for G in {H, L_k, L_k†} (generators) or
// {l_k, l_k†} (steps): the commutant of the *-algebra generated by the dynamics.
inline int commutant_dimension(const QuantumModel& m, const Tolerances& tol = {}) {
    check_structure(m);
    const Index d = m.dim;
    std::vector<Matrix> gs;
    if (m.kind == ModelKind::lindblad) {
        gs.push_back(m.hamiltonian);
        for (const auto& l : m.lindblad) {
            gs.push_back(l);
            gs.push_back(l.adjoint());
        }
    } else {
        for (const auto& l : m.kraus) {
            gs.push_back(l);
            gs.push_back(l.adjoint());
        }
    }
    const Matrix one = identity(d);
    Matrix system = Matrix::Zero(static_cast<Index>(gs.size()) * d * d, d * d);
    for (std::size_t k = 0; k < gs.size(); ++k)
        system.middleRows(static_cast<Index>(k) * d * d, d * d) =
            kron(one, gs[k]) - kron(gs[k].transpose(), one);
    if (gs.empty() || system.norm() == 0.0) return static_cast<int>(d * d);
    return static_cast<int>(null_space(system, tol.rank_tol).cols());
}

// A proper nonzero harmonic projection, searched among common invariant subspaces
// of the generators and their adjoints. Every candidate is checked to be harmonic
// with limit operator equal to itself.
inline std::optional<Projection> find_harmonic_projection(const QuantumModel& m, Rng& rng,
                                                          const Tolerances& tol = {},
                                                          int attempts = 3) {
    const Index d = m.dim;
    if (d < 2) return std::nullopt;
    std::vector<Matrix> family = forward_generators(m);
    for (const auto& g : adjoint_generators(m)) family.push_back(g);
    if (m.kind == ModelKind::lindblad) family.push_back(m.hamiltonian);
    for (int a = 0; a < attempts; ++a) {
        Matrix comb = Matrix::Zero(d, d);
        for (const auto& g : family) comb += random_complex(rng) * g;
        Eigen::ComplexEigenSolver<Matrix> es(comb);
        for (Index j = 0; j < d; ++j) {
            Matrix start(d, 1);
            start.col(0) = es.eigenvectors().col(j).normalized();
            const Matrix c = invariant_closure(start, family, tol.rank_tol);
            if (c.cols() == 0 || c.cols() == d) continue;
            const Projection h = Projection::onto(c);
            if (!is_harmonic(m, h, tol)) continue;
            const Matrix y = asymptotic_operator(m, h, tol).y;
            if ((y - h.matrix()).norm() <= tol.alg_tol) return h;
        }
    }
    return std::nullopt;
}

struct IrreducibilityReport {
    std::optional<int> commutant_dim; // lindblad models only
    std::optional<Projection> harmonic_witness;
    bool irreducible = false;
    bool consistent = true;
};

// Lindblad models are decided by the commutant and cross-checked by the harmonic
// search; other kinds by the harmonic search alone.
inline IrreducibilityReport irreducibility(const QuantumModel& m, Rng& rng,
                                           const Tolerances& tol = {}) {
    IrreducibilityReport r;
    r.harmonic_witness = find_harmonic_projection(m, rng, tol);
    const bool by_harmonic = !r.harmonic_witness.has_value();
    if (m.kind == ModelKind::lindblad) {
        r.commutant_dim = commutant_dimension(m, tol);
        r.irreducible = *r.commutant_dim == 1;
        r.consistent = r.irreducible == by_harmonic;
    } else {
        r.irreducible = by_harmonic;
    }
    return r;
}

inline bool is_irreducible(const QuantumModel& m, Rng& rng, const Tolerances& tol = {}) {
    const IrreducibilityReport r = irreducibility(m, rng, tol);
    if (!r.consistent)
        throw NumericalError("commutant and harmonic-projection irreducibility tests disagree",
                             {{"commutant_dim", static_cast<double>(*r.commutant_dim)}});
    return r.irreducible;
}

} // namespace qds
