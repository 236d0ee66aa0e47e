// classical_bridge.hpp: resolution of an embedded chain versus its graph classification

#pragma once

#include "qds/classical.hpp"
#include "qds/resolution.hpp"

#include <sstream>

namespace qds {

struct ResolutionComparison {
    bool agree = false;
    ChainClassification oracle;
    std::vector<std::vector<int>> recurrent_supports; // sorted
    std::vector<int> remainder_support;
    std::vector<std::string> flags;
    std::string detail; // human-readable diff when !agree
};

namespace detail {

inline std::string format_sets(const std::vector<std::vector<int>>& sets) {
    std::ostringstream out;
    out << "{";
    for (std::size_t i = 0; i < sets.size(); ++i) {
        out << (i ? ", " : "") << "{";
        for (std::size_t j = 0; j < sets[i].size(); ++j) out << (j ? "," : "") << sets[i][j];
        out << "}";
    }
    out << "}";
    return out.str();
}

} // namespace detail

// Compares a finished resolution of the chain P with the strongly-connected-component
// oracle: supports of recurrent projections versus closed classes, remainder versus
// transient states.
inline ResolutionComparison compare_resolution(const ResolutionResult& r, const RealMatrix& p) {
    ResolutionComparison c;
    c.oracle = classical_classify(p);
    c.recurrent_supports = recurrent_supports(r);
    c.remainder_support = remainder_support(r);
    c.flags = r.flags;
    const bool classes = c.recurrent_supports == c.oracle.closed_classes;
    const bool transient = c.remainder_support == c.oracle.transient_states;
    c.agree = classes && transient && r.flags.empty();
    if (!c.agree) {
        std::ostringstream out;
        if (!classes)
            out << "recurrent supports " << detail::format_sets(c.recurrent_supports)
                << " vs closed classes " << detail::format_sets(c.oracle.closed_classes) << "; ";
        if (!transient)
            out << "remainder " << detail::format_sets({c.remainder_support}) << " vs transient "
                << detail::format_sets({c.oracle.transient_states}) << "; ";
        for (const auto& f : r.flags) out << f << "; ";
        c.detail = out.str();
    }
    return c;
}

inline ResolutionComparison compare_resolutions(const RealMatrix& p, std::uint64_t seed,
                                                const Tolerances& tol = {}) {
    const QuantumModel m = stochastic_to_channel(p);
    ResolveOptions opt;
    opt.diagonal_snap = true;
    return compare_resolution(resolve(m, seed, tol, opt), p);
}

} // namespace qds
