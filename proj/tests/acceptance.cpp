// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

using namespace qds;
using namespace qds::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// 1. Embedded chains: resolution supports equal the graph's closed classes.
Outcome classical_oracle_equivalence() {
    const auto t0 = Clock::now();
    Rng rng(1001);
    int disagreements = 0, total = 0;
    std::string first;
    auto check = [&](const RealMatrix& p, std::uint64_t seed) {
        ++total;
        const ResolutionComparison c = compare_resolutions(p, seed);
        if (!c.agree) {
            ++disagreements;
            if (first.empty()) first = c.detail;
        }
    };
    for (int i = 0; i < 200; ++i) {
        const Index d = 1 + i % 8;
        const RealMatrix p = i % 2 ? random_stochastic(d, rng, 0.15 + 0.05 * (i % 5))
                                   : structured_chain(d, 1 + i % std::min<Index>(3, d), rng);
        check(p, static_cast<std::uint64_t>(i));
    }
    RealMatrix abs3(3, 3);
    abs3 << 1, 0, 0, 0.5, 0, 0.5, 0, 0, 1;
    check(abs3, kDefaultSeed);
    const double secs = seconds_since(t0);
    std::ostringstream out;
    out << total << " chains, " << disagreements << " disagreements, " << secs << " s";
    if (!first.empty()) out << " (first: " << first << ")";
    return {disagreements == 0 && secs < 60.0, out.str()};
}

// 2. Algebraic sub-harmonic verdict versus min eig(τ_Δ(p) - p) ≥ -1e-8.
Outcome subharmonic_criterion_equivalence() {
    Rng rng(2002);
    int disagreements = 0, positives = 0, total = 0;
    for (int i = 0; i < 100; ++i) {
        const Index d = 2 + i % 5;
        const Index r = 1 + (i / 5) % (d - 1);
        const int k = 1 + i % 3;
        const PlantedModel pm = i % 2 ? planted_kraus_model(d, r, k, rng)
                                      : planted_lindblad_model(d, r, k, rng);
        for (const Projection& p : {pm.p, random_projection(d, r, rng)}) {
            ++total;
            const bool algebraic = subharmonic_residuals(pm.model, p).verdict;
            const bool order = order_test_min_eig(pm.model, p) >= -1e-8;
            positives += algebraic;
            disagreements += algebraic != order;
        }
    }
    std::ostringstream out;
    out << total << " (model, projection) pairs, " << positives << " sub-harmonic, "
        << disagreements << " disagreements";
    return {disagreements == 0, out.str()};
}

struct InjectivitySample {
    QuantumModel model;
    Projection p;
    Matrix y;
    int closure_dim = 0;
};

std::vector<InjectivitySample> injectivity_samples() {
    Rng rng(3003);
    std::vector<InjectivitySample> out;
    for (int i = 0; i < 100; ++i) {
        const Index d = 2 + i % 5;
        const Index r = 1 + (i / 5) % (d - 1);
        const int k = 1 + i % 3;
        PlantedModel pm = i % 2 ? planted_kraus_model(d, r, k, rng)
                                : planted_lindblad_model(d, r, k, rng);
        InjectivitySample s{pm.model, pm.p, asymptotic_operator(pm.model, pm.p).y,
                            reachability_closure(pm.model, pm.p).dim};
        out.push_back(std::move(s));
    }
    // planted models whose complement block is itself invariant: y is not injective
    for (int i = 0; i < 20; ++i) {
        const Index d = 3 + i % 3;
        std::vector<Matrix> ls;
        Matrix s = Matrix::Zero(d, d);
        for (int k = 0; k < 2; ++k) {
            Matrix x = random_gaussian(d, d, rng);
            x.bottomLeftCorner(d - 1, 1).setZero();
            x.topRightCorner(1, d - 1).setZero();
            s += x.adjoint() * x;
            ls.push_back(std::move(x));
        }
        const Matrix n = inverse_sqrt_psd(s);
        for (auto& x : ls) x = x * n;
        const Matrix u = random_unitary(d, rng);
        for (auto& x : ls) x = u * x * u.adjoint();
        QuantumModel m = make_kraus_model(std::move(ls));
        Matrix basis = u.leftCols(1);
        const Projection p = Projection::onto(basis);
        out.push_back({m, p, asymptotic_operator(m, p).y, reachability_closure(m, p).dim});
    }
    return out;
}

// 3. Closure dimension = d ⟺ min eig(y) > 1e-9.
Outcome injectivity_equivalence(const std::vector<InjectivitySample>& samples) {
    int disagreements = 0, injective = 0;
    for (const auto& s : samples) {
        const bool by_closure = s.closure_dim == s.model.dim;
        const bool by_spectrum = min_eigenvalue(s.y) > 1e-9;
        injective += by_closure;
        disagreements += by_closure != by_spectrum;
    }
    std::ostringstream out;
    out << samples.size() << " models (" << injective << " injective), " << disagreements
        << " disagreements";
    return {disagreements == 0 && injective > 0 && injective < static_cast<int>(samples.size()),
            out.str()};
}

// 4. Injective limits equal the identity; resolved projections are positive recurrent.
Outcome finite_dimensional_collapse(const std::vector<InjectivitySample>& samples) {
    int injective = 0, violations = 0;
    double worst = 0.0;
    for (const auto& s : samples) {
        if (min_eigenvalue(s.y) > 1e-6) {
            ++injective;
            const double dist = (s.y - identity(s.model.dim)).norm();
            worst = std::max(worst, dist);
            violations += dist > 1e-6;
        }
    }
    int resolved = 0, not_recurrent = 0;
    Rng rng(4004);
    std::vector<QuantumModel> models;
    for (const char* f : {"id.json", "ad.json", "ad_l.json", "deph.json", "abs3.json"})
        models.push_back(fixture(f));
    for (std::size_t i = 0; i < samples.size(); i += 4) models.push_back(samples[i].model);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const ResolutionResult r = resolve(models[i], 40 + i);
        for (const auto& p : r.recurrent_projections) {
            ++resolved;
            const bool pr = is_positive_recurrent(models[i], p, rng);
            const CornerState cs = corner_invariant_state(models[i], p);
            const bool support_matches =
                (range_projection(cs.state).matrix() - p.matrix()).norm() < 1e-8;
            not_recurrent += !(pr && support_matches);
        }
    }
    std::ostringstream out;
    out << injective << " injective limits, max ‖y - 1‖ = " << worst << "; " << resolved
        << " resolved projections, " << not_recurrent << " without a matching invariant state";
    return {violations == 0 && not_recurrent == 0 && injective > 0, out.str()};
}

// 5. Orthogonality, completeness and injective y_total on fixtures and random models.
Outcome resolution_invariants() {
    std::vector<QuantumModel> models;
    for (const char* f : {"id.json", "ad.json", "ad_l.json", "deph.json", "abs3.json"})
        models.push_back(fixture(f));
    Rng rng(5005);
    for (int i = 0; i < 50; ++i) {
        const Index d = 2 + i % 5;
        const Index r = 1 + (i / 5) % (d - 1);
        if (i % 3 == 0) {
            models.push_back(i % 2 ? random_kraus_model(d, 2, rng) : random_lindblad_model(d, 2, rng));
        } else {
            models.push_back(i % 2 ? planted_kraus_model(d, r, 2, rng).model
                                   : planted_lindblad_model(d, r, 2, rng).model);
        }
    }
    int failures = 0;
    double worst_ortho = 0.0, worst_complete = 0.0, min_y = 1.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const ResolutionResult r = resolve(models[i], 500 + i);
        const Index d = models[i].dim;
        Matrix sum = r.metastable_remainder.matrix();
        double ortho = 0.0;
        const auto& ps = r.recurrent_projections;
        for (std::size_t a = 0; a < ps.size(); ++a) {
            sum += ps[a].matrix();
            for (std::size_t b = 0; b < ps.size(); ++b)
                if (a != b) ortho = std::max(ortho, (ps[a].matrix() * ps[b].matrix()).norm());
        }
        const double complete = (sum - identity(d)).norm();
        // y_total recomputed independently from the recurrent sum
        Matrix psum = Matrix::Zero(d, d);
        for (const auto& p : ps) psum += p.matrix();
        const double me = min_eigenvalue(
            asymptotic_operator(models[i], Projection::from_matrix(psum)).y);
        worst_ortho = std::max(worst_ortho, ortho);
        worst_complete = std::max(worst_complete, complete);
        min_y = std::min(min_y, me);
        failures += ortho > 1e-8 || complete > 1e-8 || !(me > 1e-9);
    }
    std::ostringstream out;
    out << models.size() << " models, " << failures << " failures; max ‖p_i p_j‖ = " << worst_ortho
        << ", max ‖Σp_i + q - 1‖ = " << worst_complete << ", min eig(y_total) = " << min_y;
    return {failures == 0, out.str()};
}

// 6. Picard scheme on the damping generator.
Outcome picard_convergence() {
    const auto t0 = Clock::now();
    const QuantumModel m = fixture("ad_l.json");
    const Matrix x = diag({1, 0});
    const Matrix exact = diag({1, 1.0 - std::exp(-1.0)});
    const PicardLimit fine = picard_limit(m, x, 1.0, 1e-15, 50, 256);
    bool monotone = true;
    for (std::size_t n = 1; n < fine.trace.iterates.size(); ++n)
        monotone = monotone &&
                   min_eigenvalue(fine.trace.iterates[n] - fine.trace.iterates[n - 1]) >= -1e-12;
    const double err_fine = (fine.value - exact).norm();
    const double err_coarse = (picard_limit(m, x, 1.0, 1e-15, 50, 128).value - exact).norm();
    const double ratio = err_coarse / err_fine;
    const double secs = seconds_since(t0);
    std::ostringstream out;
    out << "error " << err_fine << " at 256 steps, " << err_coarse << " at 128 (ratio " << ratio
        << "), ‖picard - exp‖ = " << fine.exponential_difference << ", monotone "
        << (monotone ? "yes" : "no") << ", " << secs << " s";
    const bool pass = monotone && err_fine <= 1e-6 && fine.exponential_difference <= 1e-6 &&
                      ratio >= 8.0 && ratio <= 32.0 && secs < 5.0;
    return {pass, out.str()};
}

// 7. Strong ergodicity of the damping channel and the reduced equivalence.
Outcome strong_ergodicity() {
    Rng rng(7007);
    const QuantumModel ad = fixture("ad.json");
    const StrongErgodicity se = strong_ergodicity_check(ad, rng);
    const double state_err = se.phi0 ? (se.phi0->matrix() - diag({1, 0})).norm() : 1.0;
    bool consistent = true;
    int checked = 0;
    for (const char* f : {"ad.json", "deph.json", "abs3.json"}) {
        const QuantumModel m = fixture(f);
        for (const auto& p : invariant_states(m, kDefaultSeed).supports) {
            ++checked;
            consistent = consistent && reduced_ergodicity_equivalence(m, p, rng).consistent;
        }
    }
    std::ostringstream out;
    out << "holds " << (se.holds ? "yes" : "no") << ", ‖φ₀ - diag(1,0)‖ = " << state_err
        << ", trace distance at horizon n=" << se.horizon.n << ": " << se.dynamic_distance
        << ", reduced equivalence consistent on " << checked << " supports: "
        << (consistent ? "yes" : "no");
    return {se.holds && state_err <= 1e-8 && se.dynamic_distance < 1e-6 && consistent &&
                checked >= 5,
            out.str()};
}

// 8. Commutant versus harmonic-projection irreducibility.
Outcome irreducibility_cross_check() {
    Rng rng(8008);
    int disagreements = 0, reducible = 0;
    for (int i = 0; i < 50; ++i) {
        const Index d = 2 + i % 4;
        QuantumModel m;
        if (i % 2 == 0) {
            m = random_lindblad_model(d, 1 + i % 3, rng);
        } else {
            // block-diagonal generator hidden by a unitary: reducible
            const Index r = 1 + (i / 2) % (d - 1);
            Matrix h = random_hermitian(d, rng);
            h.bottomLeftCorner(d - r, r).setZero();
            h.topRightCorner(r, d - r).setZero();
            std::vector<Matrix> ls;
            for (int k = 0; k < 1 + i % 2; ++k) {
                Matrix l = 0.5 * random_gaussian(d, d, rng);
                l.bottomLeftCorner(d - r, r).setZero();
                l.topRightCorner(r, d - r).setZero();
                ls.push_back(std::move(l));
            }
            const Matrix u = random_unitary(d, rng);
            for (auto& l : ls) l = u * l * u.adjoint();
            m = make_lindblad_model(hermitian_part(u * h * u.adjoint()), std::move(ls));
        }
        const IrreducibilityReport r = irreducibility(m, rng);
        disagreements += !r.consistent;
        reducible += !r.irreducible;
    }
    const int deph = commutant_dimension(fixture("deph.json"));
    const int adl = commutant_dimension(fixture("ad_l.json"));
    const bool deph_red = !is_irreducible(fixture("deph.json"), rng);
    const bool adl_irr = is_irreducible(fixture("ad_l.json"), rng);
    std::ostringstream out;
    out << "50 models (" << reducible << " reducible), " << disagreements
        << " disagreements; dephasing commutant " << deph << ", damping commutant " << adl;
    return {disagreements == 0 && deph == 2 && adl == 1 && deph_red && adl_irr, out.str()};
}

std::string capture(const std::string& cmd, int& status) {
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    status = pclose(pipe);
    return out;
}

bool valid_identity_resolution(const std::string& report) {
    const Json j = Json::parse(report);
    const Json& rec = j["payload"]["recurrent_projections"];
    if (rec.size() != 2) return false;
    const Matrix a = matrix_from_json(rec[0]), b = matrix_from_json(rec[1]);
    const Matrix q = matrix_from_json(j["payload"]["metastable_remainder"]);
    return (a * b).norm() < 1e-8 && (a + b + q - identity(2)).norm() < 1e-8 && q.norm() < 1e-8 &&
           std::abs(a.trace().real() - 1.0) < 1e-8 && std::abs(b.trace().real() - 1.0) < 1e-8;
}

// 9. The command-line resolve is seed-selected and reproducible.
Outcome determinism() {
    const std::string base = std::string(QDS_CLI_PATH) + " resolve " + fixture_path("id.json") +
                             " --no-timing --seed ";
    int s1 = 0, s1b = 0, s2 = 0;
    const std::string a = capture(base + "1", s1);
    const std::string b = capture(base + "1", s1b);
    const std::string c = capture(base + "2", s2);
    const bool ok_exit = s1 == 0 && s1b == 0 && s2 == 0;
    const bool identical = ok_exit && a == b;
    const bool different = ok_exit && a != c;
    const bool valid = ok_exit && valid_identity_resolution(a) && valid_identity_resolution(c);
    std::ostringstream out;
    out << "seed 1 twice byte-identical: " << (identical ? "yes" : "no")
        << ", seeds 1/2 differ: " << (different ? "yes" : "no")
        << ", both valid: " << (valid ? "yes" : "no");
    return {identical && different && valid, out.str()};
}

} // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& f) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail
                  << std::endl;
        failed += !o.pass;
    };
    report(1, "classical oracle equivalence", classical_oracle_equivalence);
    report(2, "sub-harmonic criterion equivalence", subharmonic_criterion_equivalence);
    std::vector<InjectivitySample> samples;
    try {
        samples = injectivity_samples();
    } catch (const std::exception& e) {
        std::cout << "sample generation failed: " << e.what() << std::endl;
    }
    report(3, "injectivity certificate equivalence", [&] { return injectivity_equivalence(samples); });
    report(4, "finite-dimensional collapse", [&] { return finite_dimensional_collapse(samples); });
    report(5, "resolution invariants", resolution_invariants);
    report(6, "Picard convergence", picard_convergence);
    report(7, "strong ergodicity", strong_ergodicity);
    report(8, "irreducibility cross-check", irreducibility_cross_check);
    report(9, "determinism", determinism);
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed")
              << std::endl;
    return failed ? 1 : 0;
}
