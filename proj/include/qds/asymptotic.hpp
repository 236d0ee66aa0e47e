// asymptotic.hpp: y = lim τ_t(p) for sub-harmonic p

#pragma once

#include "qds/model.hpp"
#include "qds/projections.hpp"
#include "qds/spectral.hpp"

#include <sstream>

namespace qds {

struct AsymptoticOptions {
    SpectralOptions spectral{};
    // Allowed ‖y - τ_T(p)‖ between the spectral limit and long-horizon evolution;
    // non-positive means tol.alg_tol.
    double cross_check_tol = 0.0;
};

struct AsymptoticResult {
    Matrix y;              // ergodic projection applied to p
    Matrix horizon_value;  // τ_T(p), T from convergence_horizon
    Horizon horizon;
    double cross_check = 0.0;       // ‖y - τ_T(p)‖
    double corner_residual = 0.0;   // max(‖py - p‖, ‖yp - p‖)
    double invariance_residual = 0.0; // ‖τ(y) - y‖ (steps) or ‖L(y)‖ (generators)
    ErgodicProjection ergodic;
};

// Spectral and dynamic candidates for y that disagree.
class AsymptoticMismatch : public NumericalError {
public:
    AsymptoticMismatch(const std::string& what, double gap, Matrix spectral, Matrix dynamic)
        : NumericalError(what, {{"cross_check", gap}}), spectral_(std::move(spectral)),
          dynamic_(std::move(dynamic)) {}
    const Matrix& spectral_candidate() const { return spectral_; }
    const Matrix& dynamic_candidate() const { return dynamic_; }

private:
    Matrix spectral_, dynamic_;
};

inline AsymptoticResult asymptotic_operator(const QuantumModel& m, const Projection& p,
                                            const Tolerances& tol = {},
                                            const AsymptoticOptions& opt = {}) {
    const SubharmonicResult sub = subharmonic_residuals(m, p, tol);
    if (!sub.verdict)
        throw std::invalid_argument("limit not monotone, y undefined: projection is not "
                                    "sub-harmonic (residual " +
                                    std::to_string(sub.residual) + ")");
    const Superoperator s = heisenberg_superoperator(m, tol);
    AsymptoticResult out;
    out.ergodic = ergodic_projection(s, tol, opt.spectral);
    out.y = hermitian_part(unvec(out.ergodic.projection * vec(p.matrix()), m.dim));

    out.horizon = convergence_horizon(s.time_kind, out.ergodic, m.dim, tol.conv_tol);
    out.horizon_value = evolve(s, p.matrix(), out.horizon, tol);
    out.cross_check = (out.y - out.horizon_value).norm();
    const double allowed = opt.cross_check_tol > 0.0 ? opt.cross_check_tol : tol.alg_tol;
    if (out.cross_check > allowed) {
        std::ostringstream msg;
        msg << "asymptotic operator: spectral limit and evolution to the horizon disagree by "
            << out.cross_check;
        throw AsymptoticMismatch(msg.str(), out.cross_check, out.y, out.horizon_value);
    }

    const Matrix& pm = p.matrix();
    out.corner_residual = std::max((pm * out.y - pm).norm(), (out.y * pm - pm).norm());
    const Matrix ty = apply_map(s, out.y, tol);
    out.invariance_residual = m.discrete() ? (ty - out.y).norm() : ty.norm();
    if (out.corner_residual > tol.alg_tol || out.invariance_residual > tol.alg_tol)
        throw NumericalError("asymptotic operator violates py = yp = p or τ(y) = y",
                             {{"corner_residual", out.corner_residual},
                              {"invariance_residual", out.invariance_residual}});
    return out;
}

} // namespace qds
