// Independent reference computations used to check the library. They work with
// direct operator sums and Runge-Kutta integration rather than superoperators.
#pragma once

#include "qds/qds.hpp"

#include <vector>

namespace qds::testing {

inline Matrix heisenberg_direct(const QuantumModel& m, const Matrix& x) {
    Matrix out = Matrix::Zero(m.dim, m.dim);
    if (m.discrete()) {
        for (const auto& l : m.kraus) out += l.adjoint() * x * l;
        return out;
    }
    const Complex i(0.0, 1.0);
    Matrix lsum = Matrix::Zero(m.dim, m.dim);
    for (const auto& l : m.lindblad) {
        out += l.adjoint() * x * l;
        lsum += l.adjoint() * l;
    }
    out += i * (m.hamiltonian * x - x * m.hamiltonian) - 0.5 * (lsum * x + x * lsum);
    return out;
}

inline Matrix predual_direct(const QuantumModel& m, const Matrix& rho) {
    Matrix out = Matrix::Zero(m.dim, m.dim);
    if (m.discrete()) {
        for (const auto& l : m.kraus) out += l * rho * l.adjoint();
        return out;
    }
    const Complex i(0.0, 1.0);
    Matrix lsum = Matrix::Zero(m.dim, m.dim);
    for (const auto& l : m.lindblad) {
        out += l * rho * l.adjoint();
        lsum += l.adjoint() * l;
    }
    out += -i * (m.hamiltonian * rho - rho * m.hamiltonian) - 0.5 * (lsum * rho + rho * lsum);
    return out;
}

// Classical RK4 on dx/dt = L(x).
inline Matrix rk4_heisenberg(const QuantumModel& m, Matrix x, double t, int steps = 2000) {
    const double h = t / steps;
    for (int s = 0; s < steps; ++s) {
        const Matrix k1 = heisenberg_direct(m, x);
        const Matrix k2 = heisenberg_direct(m, x + 0.5 * h * k1);
        const Matrix k3 = heisenberg_direct(m, x + 0.5 * h * k2);
        const Matrix k4 = heisenberg_direct(m, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

// Absorption probabilities h(i) = P(reach S eventually | start i) for a closed set
// S: h = 1 on S, h = 0 on states that cannot reach S, h = P h elsewhere.
inline Eigen::VectorXd absorption_probabilities(const RealMatrix& p, const std::vector<int>& target) {
    const Index d = p.rows();
    // reach[i][j]: j reachable from i in ≥ 0 steps
    std::vector<std::vector<bool>> reach(d, std::vector<bool>(d, false));
    for (Index i = 0; i < d; ++i) {
        reach[i][i] = true;
        for (Index j = 0; j < d; ++j)
            if (p(i, j) > 0.0) reach[i][j] = true;
    }
    for (Index k = 0; k < d; ++k)
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    std::vector<bool> in_target(d, false);
    for (int s : target) in_target[s] = true;
    RealMatrix a = RealMatrix::Identity(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (Index i = 0; i < d; ++i) {
        bool can = false;
        for (int s : target) can = can || reach[i][s];
        if (in_target[i]) {
            b(i) = 1.0;
        } else if (can) {
            a.row(i) -= p.row(i);
        }
    }
    return a.colPivHouseholderQr().solve(b);
}

// Closed classes by brute-force transitive closure (independent of Tarjan).
inline std::vector<std::vector<int>> closed_classes_bruteforce(const RealMatrix& p) {
    const int d = static_cast<int>(p.rows());
    std::vector<std::vector<bool>> reach(d, std::vector<bool>(d, false));
    for (int i = 0; i < d; ++i) {
        reach[i][i] = true;
        for (int j = 0; j < d; ++j)
            if (p(i, j) > 0.0) reach[i][j] = true;
    }
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    std::vector<std::vector<int>> out;
    for (int i = 0; i < d; ++i) {
        // i is recurrent iff everything reachable from i reaches back
        bool closed = true;
        for (int j = 0; j < d; ++j)
            if (reach[i][j] && !reach[j][i]) closed = false;
        if (!closed) continue;
        std::vector<int> cls;
        for (int j = 0; j < d; ++j)
            if (reach[i][j]) cls.push_back(j);
        if (cls.front() == i) out.push_back(cls);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline bool is_closed_set(const RealMatrix& p, unsigned mask) {
    const int d = static_cast<int>(p.rows());
    for (int i = 0; i < d; ++i) {
        if (!(mask >> i & 1u)) continue;
        for (int j = 0; j < d; ++j)
            if (!(mask >> j & 1u) && p(i, j) > 0.0) return false;
    }
    return true;
}

inline Matrix diagonal_projection(Index d, unsigned mask) {
    Matrix p = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i)
        if (mask >> i & 1u) p(i, i) = 1.0;
    return p;
}

} // namespace qds::testing
