// classical.hpp: classical Markov chains: diagonal embedding as a channel and the
// strongly-connected-component classification used as an independent oracle

#pragma once

#include "qds/model.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace qds {

struct ChainClassification {
    std::vector<std::vector<int>> closed_classes; // each sorted, list sorted
    std::vector<int> transient_states;            // sorted
};

inline void require_stochastic(const RealMatrix& p, double tol = 1e-12) {
    if (p.rows() != p.cols() || p.rows() == 0)
        throw StructuralError("stochastic matrix must be square and non-empty");
    if (!p.allFinite()) throw StructuralError("stochastic matrix has non-finite entries");
    if (p.minCoeff() < 0.0) throw StructuralError("not a stochastic matrix: negative entry");
    const double dev = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
    if (dev > tol)
        throw StructuralError("not a stochastic matrix: row sums deviate from 1 by " +
                              std::to_string(dev));
}

// Kraus channel with K_ij = √P(i,j) |j⟩⟨i|, so that τ(diag f) = diag(P f).
inline QuantumModel stochastic_to_channel(const RealMatrix& p) {
    require_stochastic(p);
    QuantumModel m = make_kraus_model(stochastic_kraus_ops(p));
    const Superoperator s = heisenberg_superoperator(m);
    const Index d = p.rows();
    for (Index j = 0; j < d; ++j) {
        Matrix f = Matrix::Zero(d, d);
        f(j, j) = 1.0;
        Matrix expected = Matrix::Zero(d, d);
        expected.diagonal() = p.col(j).cast<Complex>();
        const double err = (apply_map(s, f) - expected).norm();
        if (err > 1e-12)
            throw NumericalError("chain embedding does not reproduce P on basis functions",
                                 {{"embedding_residual", err}});
    }
    return m;
}

// Closed classes are the strongly connected components with no edge leaving them
// (Tarjan's algorithm on the digraph i → j iff P(i,j) > 0).
inline ChainClassification classical_classify(const RealMatrix& p) {
    require_stochastic(p);
    const int n = static_cast<int>(p.rows());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<bool> on_stack(n, false);
    int counter = 0, ncomp = 0;

    std::function<void(int)> connect = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w = 0; w < n; ++w) {
            if (!(p(v, w) > 0.0)) continue;
            if (index[w] < 0) {
                connect(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = ncomp;
            } while (w != v);
            ++ncomp;
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) connect(v);

    std::vector<bool> leaks(ncomp, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (p(i, j) > 0.0 && comp[i] != comp[j]) leaks[comp[i]] = true;

    ChainClassification out;
    std::vector<std::vector<int>> members(ncomp);
    for (int i = 0; i < n; ++i) members[comp[i]].push_back(i);
    for (int c = 0; c < ncomp; ++c) {
        if (leaks[c]) {
            out.transient_states.insert(out.transient_states.end(), members[c].begin(),
                                        members[c].end());
        } else {
            out.closed_classes.push_back(members[c]);
        }
    }
    std::sort(out.closed_classes.begin(), out.closed_classes.end());
    std::sort(out.transient_states.begin(), out.transient_states.end());
    return out;
}

} // namespace qds
