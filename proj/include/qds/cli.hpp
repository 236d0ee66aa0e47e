// cli.hpp: command implementations behind the `qds` executable

#pragma once

#include "qds/classical_bridge.hpp"
#include "qds/ergodicity.hpp"
#include "qds/io.hpp"
#include "qds/picard.hpp"
#include "qds/resolution.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace qds::cli {

struct Flags {
    Tolerances tol;
    std::uint64_t seed = kDefaultSeed;
    std::string output;          // empty: stdout
    std::string format = "json"; // json | text
    bool strict = false;
    bool timing = true;
    std::optional<double> t;
    std::optional<long> n;
    std::string picture = "heisenberg";
    int max_n = 100;
    int steps = 256;
};

// A report plus the command's verdict (false only for negative classifications).
struct Outcome {
    Report report;
    bool verdict = true;
};

// Default seed: QDS_SEED when set (decimal or 0x-prefixed hex), else kDefaultSeed.
inline std::uint64_t default_seed() {
    if (const char* env = std::getenv("QDS_SEED"); env && *env) {
        try {
            return std::stoull(env, nullptr, 0);
        } catch (const std::exception&) {
            throw StructuralError(std::string("QDS_SEED is not an integer: ") + env);
        }
    }
    return kDefaultSeed;
}

namespace detail {

inline Report start_report(const std::string& command, const QuantumModel& m, const Flags& f) {
    Report r;
    r.command = command;
    r.model_hash = model_hash(m);
    r.seed = f.seed;
    r.tolerances = f.tol;
    return r;
}

inline Json certificate_json(const Classification& c) {
    Json j;
    j["label"] = to_string(c.label);
    Json cert;
    cert["subharmonic_residual"] = c.certificate.subharmonic_residual;
    if (c.certificate.order_min_eig) cert["order_min_eig"] = *c.certificate.order_min_eig;
    if (c.certificate.invariant_state)
        cert["invariant_state"] = matrix_to_json(*c.certificate.invariant_state);
    if (c.certificate.closure_dim) cert["closure_dim"] = *c.certificate.closure_dim;
    if (c.certificate.min_eig_y) cert["min_eig_y"] = *c.certificate.min_eig_y;
    if (c.certificate.complement_metastable)
        cert["complement_metastable"] = *c.certificate.complement_metastable;
    if (c.certificate.complement_transient)
        cert["complement_transient"] = *c.certificate.complement_transient;
    if (c.certificate.minimal_rank) cert["minimal_rank"] = *c.certificate.minimal_rank;
    j["certificate"] = std::move(cert);
    return j;
}

inline Json index_sets_json(const std::vector<std::vector<int>>& sets) {
    Json j = Json::array();
    for (const auto& s : sets) j.push_back(s);
    return j;
}

inline Projection load_projection(const std::string& path) {
    return Projection::from_matrix(load_matrix(path));
}

} // namespace detail

inline Outcome cmd_check(const std::string& model_path, const Flags& f) {
    const QuantumModel m = load_model(model_path);
    Outcome o{detail::start_report("check", m, f)};
    const ValidationReport v = validate_model(m, f.tol);
    Json checks = Json::array();
    for (const auto& c : v.checks) {
        checks.push_back({{"name", c.name}, {"residual", c.residual}, {"passed", c.passed}});
        o.report.residuals[c.name] = c.residual;
    }
    o.report.payload = {{"kind", to_string(m.kind)}, {"dim", m.dim}, {"ok", v.ok},
                        {"checks", std::move(checks)}};
    o.verdict = v.ok;
    return o;
}

inline Outcome cmd_classify(const std::string& model_path, const std::string& projection_path,
                            const Flags& f) {
    const QuantumModel m = load_model(model_path);
    const Projection p = detail::load_projection(projection_path);
    Outcome o{detail::start_report("classify", m, f)};
    Rng rng(f.seed);
    require_valid(m, f.tol);

    const SubharmonicResult sub = is_subharmonic(m, p, f.tol);
    Json witnesses = Json::array();
    for (const auto& w : sub.witnesses)
        witnesses.push_back({{"op", w.op}, {"index", w.index}, {"residual", w.residual}});
    const double harm = harmonic_residual(m, p, f.tol);
    Json payload;
    payload["projection"] = matrix_to_json(p.matrix());
    payload["subharmonic"] = {{"verdict", sub.verdict},
                              {"residual", sub.residual},
                              {"order_min_eig", sub.order_min_eig},
                              {"witnesses", std::move(witnesses)}};
    payload["harmonic"] = {{"verdict", harm <= f.tol.alg_tol}, {"residual", harm}};
    o.report.residuals["subharmonic"] = sub.residual;
    o.report.residuals["harmonic"] = harm;
    if (p.is_zero()) {
        payload["classification"] = nullptr;
    } else {
        payload["classification"] = detail::certificate_json(classify_projection(m, p, rng, f.tol));
    }
    if (sub.verdict) {
        const TransienceCertificate tc = is_transient_complement(m, p, f.tol);
        payload["complement"] = {{"transient", tc.transient},
                                 {"metastable", tc.metastable},
                                 {"min_eig_y", tc.min_eig_y},
                                 {"closure_dim", tc.closure_dim},
                                 {"y", matrix_to_json(tc.y)}};
        o.report.residuals["distance_to_identity"] = tc.distance_to_identity;
    } else {
        payload["complement"] = nullptr;
    }
    o.report.payload = std::move(payload);
    o.verdict = sub.verdict;
    return o;
}

inline Outcome cmd_resolve(const std::string& model_path, const Flags& f) {
    const QuantumModel m = load_model(model_path);
    Outcome o{detail::start_report("resolve", m, f)};
    ResolveOptions opt;
    opt.classical_cross_check = false; // reported below instead of thrown
    const ResolutionResult r = resolve(m, f.seed, f.tol, opt);
    Json rec = Json::array(), certs = Json::array();
    for (const auto& p : r.recurrent_projections) rec.push_back(matrix_to_json(p.matrix()));
    for (const auto& c : r.certificates) certs.push_back(detail::certificate_json(c));
    Json payload;
    payload["recurrent_projections"] = std::move(rec);
    payload["metastable_remainder"] = matrix_to_json(r.metastable_remainder.matrix());
    payload["y_total"] = matrix_to_json(r.y_total);
    payload["certificates"] = std::move(certs);
    payload["remainder_certificate"] = detail::certificate_json(r.remainder_certificate);
    payload["flags"] = r.flags;
    if (m.kind == ModelKind::stochastic) {
        const ResolutionComparison c = compare_resolution(r, m.stochastic);
        payload["classical"] = {{"agree", c.agree},
                                {"closed_classes", detail::index_sets_json(c.oracle.closed_classes)},
                                {"transient_states", c.oracle.transient_states},
                                {"recurrent_supports", detail::index_sets_json(c.recurrent_supports)},
                                {"remainder_support", c.remainder_support},
                                {"detail", c.detail}};
        o.verdict = c.agree;
    }
    o.report.payload = std::move(payload);
    o.report.residuals = r.residuals;
    return o;
}

inline Outcome cmd_evolve(const std::string& model_path, const std::string& operator_path,
                          const Flags& f) {
    const QuantumModel m = load_model(model_path);
    const Matrix x = load_matrix(operator_path);
    Outcome o{detail::start_report("evolve", m, f)};
    if (f.picture != "heisenberg" && f.picture != "schrodinger")
        throw StructuralError("--picture must be heisenberg or schrodinger");
    const bool heis = f.picture == "heisenberg";
    Json payload;
    payload["picture"] = f.picture;
    Matrix out;
    if (m.discrete()) {
        if (!f.n) throw StructuralError("discrete-time model: pass --n");
        if (*f.n < 0) throw std::invalid_argument("negative time");
        out = heis ? evolve_heisenberg(m, x, Steps{*f.n}, f.tol)
                   : evolve_predual(m, x, Steps{*f.n}, f.tol);
        payload["n"] = *f.n;
    } else {
        if (!f.t) throw StructuralError("continuous-time model: pass --t");
        if (*f.t < 0.0) throw std::invalid_argument("negative time");
        out = heis ? evolve_heisenberg(m, x, Duration{*f.t}, f.tol)
                   : evolve_predual(m, x, Duration{*f.t}, f.tol);
        payload["t"] = *f.t;
    }
    payload["input"] = matrix_to_json(x);
    payload["result"] = matrix_to_json(out);
    o.report.payload = std::move(payload);
    return o;
}

inline Outcome cmd_picard(const std::string& model_path, const std::string& operator_path,
                          const Flags& f) {
    const QuantumModel m = load_model(model_path);
    const Matrix x = load_matrix(operator_path);
    Outcome o{detail::start_report("picard", m, f)};
    if (!f.t) throw StructuralError("picard: pass --t");
    if (*f.t < 0.0) throw std::invalid_argument("negative time");
    const PicardLimit lim = picard_limit(m, x, *f.t, f.tol.conv_tol, f.max_n, f.steps, f.tol);
    Json trace = Json::array();
    for (std::size_t n = 0; n < lim.trace.iterates.size(); ++n) {
        Json e;
        e["n"] = n;
        e["t"] = lim.trace.t;
        e["value"] = matrix_to_json(lim.trace.iterates[n]);
        e["increment"] = n == 0 ? Json(nullptr) : Json(lim.trace.increments[n - 1]);
        trace.push_back(std::move(e));
    }
    o.report.payload = {{"t", *f.t},
                        {"steps", f.steps},
                        {"iterations", lim.iterations},
                        {"value", matrix_to_json(lim.value)},
                        {"trace", std::move(trace)}};
    o.report.residuals = {{"last_gap", lim.last_gap},
                          {"equation_residual", lim.equation_residual},
                          {"exponential_difference", lim.exponential_difference},
                          {"quadrature_bound", lim.quadrature_bound}};
    return o;
}

inline Outcome cmd_ergodic(const std::string& model_path, const Flags& f) {
    const QuantumModel m = load_model(model_path);
    Outcome o{detail::start_report("ergodic", m, f)};
    Rng rng(f.seed);
    const InvariantStates is = invariant_states(m, f.seed, f.tol);
    const StrongErgodicity se = strong_ergodicity_check(m, rng, f.tol);
    Json basis = Json::array(), states = Json::array(), equiv = Json::array();
    for (const auto& b : is.basis) basis.push_back(matrix_to_json(b));
    for (std::size_t i = 0; i < is.states.size(); ++i) {
        states.push_back({{"state", matrix_to_json(is.states[i].matrix())},
                          {"support", matrix_to_json(is.supports[i].matrix())},
                          {"fixed_point_residual", is.residuals[i]}});
        const ReducedErgodicity r = reduced_ergodicity_equivalence(m, is.supports[i], rng, f.tol);
        equiv.push_back({{"support_index", i},
                         {"full", r.full},
                         {"reduced", r.reduced},
                         {"y_is_one", r.y_is_one},
                         {"consistent", r.consistent}});
    }
    Json strong;
    strong["holds"] = se.holds;
    strong["ergodic_multiplicity"] = se.ergodic_multiplicity;
    strong["other_peripheral"] = se.other_peripheral;
    strong["gap"] = number_json(se.gap);
    strong["phi0"] = se.phi0 ? matrix_to_json(se.phi0->matrix()) : Json(nullptr);
    if (se.horizon.kind == TimeKind::continuous_generator) {
        strong["horizon_t"] = se.horizon.t;
    } else {
        strong["horizon_n"] = se.horizon.n;
    }
    strong["dynamic_distance"] = se.dynamic_distance;
    o.report.payload = {{"fixed_space_dim", is.basis.size()},
                        {"basis", std::move(basis)},
                        {"states", std::move(states)},
                        {"strong_ergodicity", std::move(strong)},
                        {"reduced_equivalence", std::move(equiv)}};
    o.report.residuals["dynamic_distance"] = se.dynamic_distance;
    o.verdict = se.holds;
    return o;
}

inline void emit(const Report& r, const Flags& f, std::ostream& out) {
    const std::string text =
        f.format == "text" ? report_to_text(r) : report_to_json(r).dump(2) + "\n";
    if (f.output.empty() || f.output == "-") {
        out << text;
        return;
    }
    std::ofstream file(f.output);
    if (!file) throw StructuralError("cannot write " + f.output);
    file << text;
}

// Exit codes: 0 success, 1 negative verdict under --strict, 2 any error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Classification of quantum dynamical semigroups on matrix algebras"};
    app.require_subcommand(1);
    Flags f;
    std::string seed_text;
    std::string model, operand;

    auto common = [&](CLI::App* sub) {
        sub->add_option("model", model, "model JSON file")->required();
        sub->add_option("--tol", f.tol.alg_tol, "residual tolerance for algebraic identities");
        sub->add_option("--rank-tol", f.tol.rank_tol, "relative rank cutoff");
        sub->add_option("--conv-tol", f.tol.conv_tol, "convergence tolerance");
        sub->add_option("--seed", seed_text, "random seed (default $QDS_SEED or 0x0D51)");
        sub->add_option("--output", f.output, "output path (default stdout)");
        sub->add_option("--format", f.format, "json or text")
            ->check(CLI::IsMember({"json", "text"}));
        sub->add_flag("--strict", f.strict, "exit 1 when the verdict is negative");
        sub->add_flag("!--no-timing", f.timing, "omit timing_ms so reports are byte-reproducible");
    };
    std::optional<double> t;
    std::optional<long> n;
    auto timing_opts = [&](CLI::App* sub) {
        sub->add_option("--t", t, "time for continuous-time models");
        sub->add_option("--n", n, "number of steps for discrete-time models");
    };

    CLI::App* check = app.add_subcommand("check", "validate a model");
    common(check);
    CLI::App* classify = app.add_subcommand("classify", "classify a projection");
    common(classify);
    classify->add_option("projection", operand, "projection JSON file")->required();
    CLI::App* res = app.add_subcommand("resolve", "recurrent/metastable resolution");
    common(res);
    CLI::App* evo = app.add_subcommand("evolve", "evolve an operator or state");
    common(evo);
    evo->add_option("operator", operand, "matrix JSON file")->required();
    timing_opts(evo);
    evo->add_option("--picture", f.picture, "heisenberg or schrodinger")
        ->check(CLI::IsMember({"heisenberg", "schrodinger"}));
    CLI::App* pic = app.add_subcommand("picard", "Picard construction of the semigroup");
    common(pic);
    pic->add_option("operator", operand, "matrix JSON file")->required();
    timing_opts(pic);
    pic->add_option("--max-n", f.max_n, "maximum number of iterations");
    pic->add_option("--steps", f.steps, "quadrature intervals (even, at least 8)");
    CLI::App* erg = app.add_subcommand("ergodic", "invariant states and strong ergodicity");
    common(erg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        f.seed = seed_text.empty() ? default_seed() : std::stoull(seed_text, nullptr, 0);
        f.t = t;
        f.n = n;
        f.tol.validate();
        Outcome o;
        if (*check) {
            o = cmd_check(model, f);
        } else if (*classify) {
            o = cmd_classify(model, operand, f);
        } else if (*res) {
            o = cmd_resolve(model, f);
        } else if (*evo) {
            o = cmd_evolve(model, operand, f);
        } else if (*pic) {
            o = cmd_picard(model, operand, f);
        } else {
            o = cmd_ergodic(model, f);
        }
        if (f.timing)
            o.report.timing_ms = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - started)
                                     .count();
        emit(o.report, f, out);
        return (f.strict && !o.verdict) ? 1 : 0;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& [k, v] : e.residuals()) err << "  " << k << " = " << v << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace qds::cli
