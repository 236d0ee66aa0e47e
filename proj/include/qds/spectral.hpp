// spectral.hpp: eigen-structure of superoperators, ergodic (Cesàro) projections,
// convergence horizons, and time evolution

#pragma once

#include "qds/hash.hpp"
#include "qds/linalg.hpp"
#include "qds/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

namespace qds {

struct SpectralOptions {
    double cluster_radius = 1e-7;
    // The m smallest singular values of (S - λ) must fall below this (relative to
    // ‖S‖) for a cluster of multiplicity m to count as semisimple.
    double semisimple_tol = 1e-6;
};

struct SpectralCluster {
    Complex value;      // cluster mean
    int multiplicity = 0;
    bool peripheral = false;
    Matrix projection;  // d²×d² spectral projection
};

struct SpectralData {
    TimeKind time_kind = TimeKind::discrete_step;
    std::vector<Complex> eigenvalues;
    std::vector<SpectralCluster> clusters; // ergodic first, then peripheral, then by decay
    std::vector<int> peripheral_set;       // indices into clusters
    int ergodic_index = -1;
    double gap = std::numeric_limits<double>::infinity();
    double projection_sum_residual = 0.0;
};

namespace detail {

inline Complex ergodic_value(TimeKind k) {
    return k == TimeKind::discrete_step ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
}

inline bool on_boundary(Complex z, TimeKind k, double radius) {
    return k == TimeKind::discrete_step ? std::abs(std::abs(z) - 1.0) <= radius
                                        : std::abs(z.real()) <= radius;
}

// Larger = slower decay.
inline double decay_key(Complex z, TimeKind k) {
    return k == TimeKind::discrete_step ? std::abs(z) : z.real();
}

inline std::vector<Complex> eigenvalues_of(const Matrix& s) {
    Eigen::ComplexEigenSolver<Matrix> es(s, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + s.rows());
    return ev;
}

// Single-linkage grouping of eigenvalues within `radius`.
inline std::vector<std::vector<Complex>> cluster_eigenvalues(const std::vector<Complex>& ev,
                                                             double radius) {
    const std::size_t n = ev.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(ev[i] - ev[j]) <= radius) parent[find(i)] = find(j);
    std::unordered_map<std::size_t, std::vector<Complex>> groups;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (!groups.count(r)) order.push_back(r);
        groups[r].push_back(ev[i]);
    }
    std::vector<std::vector<Complex>> out;
    for (auto r : order) out.push_back(std::move(groups[r]));
    return out;
}

// Projection onto the generalized eigenspace of λ (multiplicity m) along the
// complementary invariant subspace: R (L†R)⁻¹ L† with R, L the right/left null
// spaces of (S - λ)^k, k = 1 when semisimple is required.
inline Matrix cluster_projection(const Matrix& s, Complex lambda, int m, bool require_semisimple,
                                 double semisimple_tol) {
    const Index n = s.rows();
    Matrix shifted = s - lambda * identity(n);
    Matrix power = require_semisimple ? shifted : matrix_power(shifted, m);
    Eigen::JacobiSVD<Matrix> svd(power, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (require_semisimple) {
        const double scale = std::max(1.0, op_norm(s));
        if (sv(n - m) > semisimple_tol * scale)
            throw NumericalError("non-diagonalizable peripheral part",
                                 {{"ergodic_singular_value", sv(n - m)}});
    }
    const Matrix r = svd.matrixV().rightCols(m);
    const Matrix l = svd.matrixU().rightCols(m);
    const Matrix gram = l.adjoint() * r;
    Eigen::FullPivLU<Matrix> lu(gram);
    if (!lu.isInvertible())
        throw NumericalError("spectral projection: left/right eigenspaces are not dual");
    return r * lu.solve(l.adjoint());
}

} // namespace detail

// Full eigen-decomposition with grouped eigenvalues and per-cluster projections.
inline SpectralData spectral_split(const Superoperator& s, const Tolerances& tol = {},
                                   const SpectralOptions& opt = {}) {
    tol.validate();
    SpectralData out;
    out.time_kind = s.time_kind;
    out.eigenvalues = detail::eigenvalues_of(s.matrix);
    const TimeKind k = s.time_kind;
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [&](Complex a, Complex b) {
        const double ka = detail::decay_key(a, k), kb = detail::decay_key(b, k);
        if (ka != kb) return ka > kb;
        return a.imag() > b.imag();
    });

    const Complex erg = detail::ergodic_value(k);
    for (auto& group : detail::cluster_eigenvalues(out.eigenvalues, opt.cluster_radius)) {
        SpectralCluster c;
        Complex mean(0.0, 0.0);
        for (auto z : group) mean += z;
        c.value = mean / static_cast<double>(group.size());
        c.multiplicity = static_cast<int>(group.size());
        c.peripheral = detail::on_boundary(c.value, k, opt.cluster_radius);
        out.clusters.push_back(std::move(c));
    }

    std::stable_sort(out.clusters.begin(), out.clusters.end(),
                     [&](const SpectralCluster& a, const SpectralCluster& b) {
                         const bool ea = std::abs(a.value - erg) <= opt.cluster_radius;
                         const bool eb = std::abs(b.value - erg) <= opt.cluster_radius;
                         if (ea != eb) return ea;
                         if (a.peripheral != b.peripheral) return a.peripheral;
                         return detail::decay_key(a.value, k) > detail::decay_key(b.value, k);
                     });

    Matrix total = Matrix::Zero(s.matrix.rows(), s.matrix.cols());
    for (std::size_t i = 0; i < out.clusters.size(); ++i) {
        auto& c = out.clusters[i];
        const bool ergodic = std::abs(c.value - erg) <= opt.cluster_radius;
        if (ergodic) out.ergodic_index = static_cast<int>(i);
        if (c.peripheral) out.peripheral_set.push_back(static_cast<int>(i));
        c.projection = detail::cluster_projection(s.matrix, c.value, c.multiplicity, ergodic,
                                                  opt.semisimple_tol);
        total += c.projection;
        if (!c.peripheral) {
            const double dist = k == TimeKind::discrete_step ? 1.0 - std::abs(c.value)
                                                             : -c.value.real();
            out.gap = std::min(out.gap, dist);
        }
    }
    out.projection_sum_residual = (total - identity(total.rows())).norm();
    if (out.ergodic_index < 0)
        throw NumericalError("no ergodic eigenvalue: the map is not unital/trace preserving");
    return out;
}

struct ErgodicProjection {
    Matrix projection; // d²×d²
    int multiplicity = 0;
    bool has_subperipheral = false;
    double gap = std::numeric_limits<double>::infinity();
    // discrete: largest sub-peripheral modulus; continuous: largest sub-peripheral real part
    double subperipheral = 0.0;
    std::vector<Complex> eigenvalues;
};

// Projection onto the ergodic eigenvalue (1 for steps, 0 for generators). For a
// bounded monotone net this equals its limit.
inline ErgodicProjection ergodic_projection(const Superoperator& s, const Tolerances& tol = {},
                                            const SpectralOptions& opt = {}) {
    tol.validate();
    ErgodicProjection out;
    out.eigenvalues = detail::eigenvalues_of(s.matrix);
    const TimeKind k = s.time_kind;
    const Complex erg = detail::ergodic_value(k);
    double worst = k == TimeKind::discrete_step ? 0.0 : -std::numeric_limits<double>::infinity();
    for (auto z : out.eigenvalues) {
        if (std::abs(z - erg) <= opt.cluster_radius) {
            ++out.multiplicity;
        } else if (!detail::on_boundary(z, k, opt.cluster_radius)) {
            out.has_subperipheral = true;
            worst = std::max(worst, detail::decay_key(z, k));
        }
    }
    if (out.multiplicity == 0)
        throw NumericalError("no ergodic eigenvalue: the map is not unital/trace preserving");
    if (out.has_subperipheral) {
        out.subperipheral = worst;
        out.gap = k == TimeKind::discrete_step ? 1.0 - worst : -worst;
    }
    out.projection = detail::cluster_projection(s.matrix, erg, out.multiplicity, true,
                                                opt.semisimple_tol);
    return out;
}

struct Duration {
    double t = 0.0;
};
struct Steps {
    long n = 0;
};

struct Horizon {
    TimeKind kind = TimeKind::discrete_step;
    double t = 0.0;
    long n = 0;
};

inline constexpr long kMaxHorizonSteps = 1'000'000;

// Time after which the sub-peripheral part has decayed by a factor conv_tol:
// t = max(20, ln(1/conv_tol)) / gap for generators, n = ln(conv_tol) / ln(r) for steps.
inline Horizon convergence_horizon(TimeKind kind, const ErgodicProjection& e, Index d,
                                   double conv_tol) {
    Horizon h;
    h.kind = kind;
    if (kind == TimeKind::continuous_generator) {
        if (!e.has_subperipheral || !(e.gap > 0.0)) {
            h.t = 1.0;
        } else {
            h.t = std::max(20.0, std::log(1.0 / conv_tol)) / e.gap;
        }
        return h;
    }
    const long floor_steps = static_cast<long>(d * d);
    if (!e.has_subperipheral) {
        h.n = 1;
    } else if (e.subperipheral <= std::numeric_limits<double>::min()) {
        h.n = floor_steps;
    } else {
        const double n = std::ceil(std::log(conv_tol) / std::log(e.subperipheral));
        h.n = std::min<long>(kMaxHorizonSteps,
                             std::max<long>(floor_steps, static_cast<long>(std::min(n, 1e7))));
    }
    return h;
}

inline Matrix evolve(const Superoperator& s, const Matrix& x, Duration t,
                     const Tolerances& tol = {}) {
    if (s.time_kind != TimeKind::continuous_generator)
        throw StructuralError("a discrete-time model evolves in integer steps");
    if (t.t < 0.0) throw std::invalid_argument("negative time");
    if (x.rows() != s.dim || x.cols() != s.dim)
        throw StructuralError("evolve: operator dimension mismatch");
    Matrix out = unvec(expm(t.t * s.matrix) * vec(x), s.dim);
    if (is_hermitian(x, tol.alg_tol)) out = hermitian_part(out);
    return out;
}

inline Matrix evolve(const Superoperator& s, const Matrix& x, Steps n,
                     const Tolerances& tol = {}) {
    if (s.time_kind != TimeKind::discrete_step)
        throw StructuralError("a continuous-time model evolves for a real duration");
    if (n.n < 0) throw std::invalid_argument("negative time");
    if (x.rows() != s.dim || x.cols() != s.dim)
        throw StructuralError("evolve: operator dimension mismatch");
    Vector v = vec(x);
    if (n.n <= 64) {
        for (long i = 0; i < n.n; ++i) v = s.matrix * v;
    } else {
        v = matrix_power(s.matrix, n.n) * v;
    }
    Matrix out = unvec(v, s.dim);
    if (is_hermitian(x, tol.alg_tol)) out = hermitian_part(out);
    return out;
}

inline Matrix evolve(const Superoperator& s, const Matrix& x, const Horizon& h,
                     const Tolerances& tol = {}) {
    return h.kind == TimeKind::continuous_generator ? evolve(s, x, Duration{h.t}, tol)
                                                    : evolve(s, x, Steps{h.n}, tol);
}

template <typename Time>
Matrix evolve_heisenberg(const QuantumModel& m, const Matrix& x, Time time,
                         const Tolerances& tol = {}) {
    return evolve(heisenberg_superoperator(m, tol), x, time, tol);
}

template <typename Time>
Matrix evolve_predual(const QuantumModel& m, const Matrix& rho, Time time,
                      const Tolerances& tol = {}) {
    return evolve(predual_superoperator(m, tol), rho, time, tol);
}

// Memoizes spectral_split per superoperator content. Concurrent lookups share a
// reader lock; computation happens outside the lock.
class SpectralCache {
public:
    std::shared_ptr<const SpectralData> get(const Superoperator& s, const Tolerances& tol = {},
                                            const SpectralOptions& opt = {}) {
        const std::uint64_t key = key_of(s, tol, opt);
        {
            std::shared_lock lock(mu_);
            if (auto it = map_.find(key); it != map_.end()) return it->second;
        }
        auto data = std::make_shared<const SpectralData>(spectral_split(s, tol, opt));
        std::unique_lock lock(mu_);
        return map_.try_emplace(key, std::move(data)).first->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return map_.size();
    }

private:
    static std::uint64_t key_of(const Superoperator& s, const Tolerances& tol,
                                const SpectralOptions& opt) {
        Fnv1a h;
        h.add(s.matrix.data(), sizeof(Complex) * static_cast<std::size_t>(s.matrix.size()));
        const int tags[2] = {static_cast<int>(s.picture), static_cast<int>(s.time_kind)};
        h.add(tags, sizeof(tags));
        const double params[5] = {tol.rank_tol, tol.alg_tol, tol.conv_tol, opt.cluster_radius,
                                  opt.semisimple_tol};
        h.add(params, sizeof(params));
        return h.value();
    }

    mutable std::shared_mutex mu_;
    std::unordered_map<std::uint64_t, std::shared_ptr<const SpectralData>> map_;
};

} // namespace qds
