// model.hpp: dynamical-system models (Kraus channel, Lindblad generator,
// stochastic matrix), validation, and superoperator representations
//
// Superoperators act on column-stacked d×d operators (see vec() in linalg.hpp).

#pragma once

#include "qds/linalg.hpp"
#include "qds/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qds {

enum class ModelKind { kraus, lindblad, stochastic };
enum class Picture { heisenberg, schrodinger };
enum class TimeKind { discrete_step, continuous_generator };

inline std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::kraus: return "kraus";
    case ModelKind::lindblad: return "lindblad";
    case ModelKind::stochastic: return "stochastic";
    }
    return "?";
}

inline std::string to_string(Picture p) {
    return p == Picture::heisenberg ? "heisenberg" : "schrodinger";
}

inline std::string to_string(TimeKind t) {
    return t == TimeKind::discrete_step ? "discrete_step" : "continuous_generator";
}

struct QuantumModel {
    Index dim = 0;
    ModelKind kind = ModelKind::kraus;
    std::vector<Matrix> kraus;    // kraus: l_k; stochastic: embedded K_ij (filled eagerly)
    Matrix hamiltonian;           // lindblad: H
    std::vector<Matrix> lindblad; // lindblad: L_k
    std::optional<Matrix> drift;  // lindblad: Y, derived from H and L_k when absent
    RealMatrix stochastic;        // stochastic: row-stochastic P
    bool sub_markov = false;      // compression onto a set that is not closed

    bool discrete() const { return kind != ModelKind::lindblad; }
    TimeKind time_kind() const {
        return discrete() ? TimeKind::discrete_step : TimeKind::continuous_generator;
    }
};

// K_ij = sqrt(P(i,j)) |j><i| for every P(i,j) > 0; then τ(diag f) = diag(P f).
inline std::vector<Matrix> stochastic_kraus_ops(const RealMatrix& p) {
    std::vector<Matrix> ops;
    const Index d = p.rows();
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
            if (p(i, j) > 0.0) {
                Matrix k = Matrix::Zero(d, d);
                k(j, i) = std::sqrt(p(i, j));
                ops.push_back(std::move(k));
            }
    return ops;
}

// Y = -iH - ½ Σ L_k† L_k, the unique drift making the generator unital.
inline Matrix effective_drift(const Matrix& h, const std::vector<Matrix>& ls,
                              const Tolerances& tol = {}) {
    if (h.rows() != h.cols())
        throw StructuralError("effective_drift: hamiltonian is not square");
    if (!is_hermitian(h, tol.alg_tol))
        throw std::invalid_argument("effective_drift: hamiltonian is not hermitian");
    const Complex i(0.0, 1.0);
    Matrix y = -i * hermitian_part(h);
    for (const auto& l : ls) {
        if (l.rows() != h.rows() || l.cols() != h.cols())
            throw StructuralError("effective_drift: lindblad operator dimension mismatch");
        y -= 0.5 * (l.adjoint() * l);
    }
    return y;
}

// Throws StructuralError on shape mismatches or non-finite entries.
inline void check_structure(const QuantumModel& m) {
    if (m.dim <= 0) throw StructuralError("model dimension must be positive");
    auto check_op = [&](const Matrix& x, const std::string& what) {
        if (x.rows() != m.dim || x.cols() != m.dim)
            throw StructuralError(what + ": expected " + std::to_string(m.dim) + "x" +
                                  std::to_string(m.dim) + ", got " + std::to_string(x.rows()) +
                                  "x" + std::to_string(x.cols()));
        if (!x.allFinite()) throw StructuralError(what + ": non-finite entry");
    };
    switch (m.kind) {
    case ModelKind::kraus:
        if (m.kraus.empty()) throw StructuralError("kraus model needs at least one operator");
        for (std::size_t k = 0; k < m.kraus.size(); ++k)
            check_op(m.kraus[k], "kraus[" + std::to_string(k) + "]");
        break;
    case ModelKind::lindblad:
        check_op(m.hamiltonian, "hamiltonian");
        for (std::size_t k = 0; k < m.lindblad.size(); ++k)
            check_op(m.lindblad[k], "lindblad[" + std::to_string(k) + "]");
        if (m.drift) check_op(*m.drift, "drift");
        break;
    case ModelKind::stochastic:
        if (m.stochastic.rows() != m.dim || m.stochastic.cols() != m.dim)
            throw StructuralError("stochastic: matrix dimension mismatch");
        if (!m.stochastic.allFinite()) throw StructuralError("stochastic: non-finite entry");
        break;
    }
}

inline QuantumModel make_kraus_model(std::vector<Matrix> ops) {
    QuantumModel m;
    m.kind = ModelKind::kraus;
    m.dim = ops.empty() ? 0 : ops.front().rows();
    m.kraus = std::move(ops);
    check_structure(m);
    return m;
}

inline QuantumModel make_lindblad_model(Matrix h, std::vector<Matrix> ls,
                                        std::optional<Matrix> drift = std::nullopt) {
    QuantumModel m;
    m.kind = ModelKind::lindblad;
    m.dim = h.rows();
    m.hamiltonian = std::move(h);
    m.lindblad = std::move(ls);
    m.drift = std::move(drift);
    check_structure(m);
    if (!m.drift && is_hermitian(m.hamiltonian, Tolerances{}.alg_tol))
        m.drift = effective_drift(m.hamiltonian, m.lindblad);
    return m;
}

inline QuantumModel make_stochastic_model(RealMatrix p, bool sub_markov = false) {
    QuantumModel m;
    m.kind = ModelKind::stochastic;
    m.dim = p.rows();
    m.stochastic = std::move(p);
    m.sub_markov = sub_markov;
    check_structure(m);
    m.kraus = stochastic_kraus_ops(m.stochastic);
    return m;
}

// The drift Y; for models whose H failed hermiticity this is the raw formula.
inline Matrix drift_of(const QuantumModel& m) {
    if (m.kind != ModelKind::lindblad)
        throw StructuralError("drift is defined for lindblad models only");
    if (m.drift) return *m.drift;
    const Complex i(0.0, 1.0);
    Matrix y = -i * m.hamiltonian;
    for (const auto& l : m.lindblad) y -= 0.5 * (l.adjoint() * l);
    return y;
}

// Operators whose common invariant subspaces are the sub-harmonic ranges:
// {l_k} for discrete models, {Y, L_k} for generators.
inline std::vector<Matrix> forward_generators(const QuantumModel& m) {
    if (m.kind != ModelKind::lindblad) return m.kraus;
    std::vector<Matrix> g;
    g.push_back(drift_of(m));
    for (const auto& l : m.lindblad) g.push_back(l);
    return g;
}

inline std::vector<Matrix> adjoint_generators(const QuantumModel& m) {
    std::vector<Matrix> g = forward_generators(m);
    for (auto& x : g) x = x.adjoint().eval();
    return g;
}

struct ValidationCheck {
    std::string name;
    double residual = 0.0;
    bool passed = true;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationCheck> checks;
};

inline ValidationReport validate_model(const QuantumModel& m, const Tolerances& tol = {}) {
    tol.validate();
    check_structure(m);
    ValidationReport report;
    auto add = [&](std::string name, double residual) {
        const bool passed = residual <= tol.alg_tol;
        report.checks.push_back({std::move(name), residual, passed});
        report.ok = report.ok && passed;
    };
    const Matrix one = identity(m.dim);
    switch (m.kind) {
    case ModelKind::kraus: {
        Matrix s = Matrix::Zero(m.dim, m.dim);
        for (const auto& l : m.kraus) s += l.adjoint() * l;
        add("kraus_unitality", (s - one).norm());
        break;
    }
    case ModelKind::lindblad: {
        add("hamiltonian_hermitian", hermiticity_residual(m.hamiltonian));
        const Matrix y = drift_of(m);
        Matrix s = y + y.adjoint();
        for (const auto& l : m.lindblad) s += l.adjoint() * l;
        add("generator_unitality", s.norm());
        break;
    }
    case ModelKind::stochastic: {
        add("stochastic_nonnegative", std::max(0.0, -m.stochastic.minCoeff()));
        const Eigen::VectorXd rows = m.stochastic.rowwise().sum();
        add("stochastic_row_sums", (rows.array() - 1.0).abs().maxCoeff());
        break;
    }
    }
    return report;
}

// Throws NumericalError listing the failed residuals. Sub-Markov compressions are
// exempt: they are unital only on their closed part by construction.
inline void require_valid(const QuantumModel& m, const Tolerances& tol) {
    const ValidationReport r = validate_model(m, tol);
    if (r.ok || m.sub_markov) return;
    std::map<std::string, double> res;
    std::string names;
    for (const auto& c : r.checks)
        if (!c.passed) {
            res[c.name] = c.residual;
            names += (names.empty() ? "" : ", ") + c.name;
        }
    throw NumericalError("model failed validation: " + names, res);
}

struct Superoperator {
    Index dim = 0;
    Matrix matrix; // d²×d², acts on vec(x)
    Picture picture = Picture::heisenberg;
    TimeKind time_kind = TimeKind::discrete_step;
};

// x ↦ Σ l† x l (discrete) or x ↦ Y† x + x Y + Σ L† x L (generator).
inline Superoperator heisenberg_superoperator(const QuantumModel& m, const Tolerances& tol = {}) {
    require_valid(m, tol);
    const Index d = m.dim;
    const Matrix one = identity(d);
    Superoperator s{d, Matrix::Zero(d * d, d * d), Picture::heisenberg, m.time_kind()};
    if (m.discrete()) {
        for (const auto& l : m.kraus) s.matrix += kron(l.transpose(), l.adjoint());
    } else {
        const Matrix y = drift_of(m);
        s.matrix = kron(one, y.adjoint()) + kron(y.transpose(), one);
        for (const auto& l : m.lindblad) s.matrix += kron(l.transpose(), l.adjoint());
    }
    return s;
}

// ρ ↦ Σ l ρ l† (discrete) or ρ ↦ Yρ + ρY† + Σ L ρ L† (generator).
inline Superoperator predual_superoperator(const QuantumModel& m, const Tolerances& tol = {}) {
    require_valid(m, tol);
    const Index d = m.dim;
    const Matrix one = identity(d);
    Superoperator s{d, Matrix::Zero(d * d, d * d), Picture::schrodinger, m.time_kind()};
    if (m.discrete()) {
        for (const auto& l : m.kraus) s.matrix += kron(l.conjugate(), l);
    } else {
        const Matrix y = drift_of(m);
        s.matrix = kron(one, y) + kron(y.conjugate(), one);
        for (const auto& l : m.lindblad) s.matrix += kron(l.conjugate(), l);
    }
    return s;
}

// Hermitian inputs are re-symmetrized on output to suppress drift.
inline Matrix apply_map(const Superoperator& s, const Matrix& x, const Tolerances& tol = {}) {
    if (x.rows() != s.dim || x.cols() != s.dim)
        throw StructuralError("apply_map: operator dimension does not match superoperator");
    Matrix out = unvec(s.matrix * vec(x), s.dim);
    if (is_hermitian(x, tol.alg_tol)) out = hermitian_part(out);
    return out;
}

// ‖L(1)‖ for generators, ‖τ(1) − 1‖ for steps (Heisenberg picture only).
inline double identity_residual(const Superoperator& s) {
    if (s.picture != Picture::heisenberg)
        throw std::invalid_argument("identity_residual: heisenberg picture expected");
    const Matrix one = identity(s.dim);
    const Matrix img = unvec(s.matrix * vec(one), s.dim);
    return s.time_kind == TimeKind::continuous_generator ? img.norm() : (img - one).norm();
}

} // namespace qds
