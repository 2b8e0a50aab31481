// Acceptance runner: one pass/fail line per criterion, nonzero exit on failure.
// Run all criteria with no arguments, or a single one with --criterion N.

#include "qfkit/bounds.hpp"
#include "qfkit/channels.hpp"
#include "qfkit/entropy.hpp"
#include "qfkit/graphmix.hpp"
#include "qfkit/majorize.hpp"
#include "qfkit/suites.hpp"
#include "qfkit/uncertainty.hpp"

#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>

using namespace qfkit;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::vector<Real> linspace(Real lo, Real hi, int n) {
    std::vector<Real> out;
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
}

// 1. Randomized inequality suites at 1000 trials per dimension 2..6, tol 1e-8.
Outcome criterion_suites() {
    const std::vector<std::string> names = {"ssa",        "subadd",    "chain",    "keylem",
                                            "wnorm-triangle", "dataproc", "thmrelent", "worstsig",
                                            "flatten",    "revconv",   "corsimpleg", "ephi",
                                            "near"};
    Outcome out;
    std::ostringstream os;
    for (const auto& name : names) {
        for (int d = 2; d <= 6; ++d) {
            SuiteResult r = suite_registry().at(name)(d, 1000, 0x5eed0000 + d, 1e-8);
            if (!r.violations.empty()) {
                out.pass = false;
                os << " " << name << "(d=" << d << "):" << r.violations.size() << " violations, max "
                   << r.max_violation;
            }
        }
    }
    out.detail = out.pass ? "13 suites x d in 2..6 x 1000 trials, zero violations" : os.str();
    return out;
}

// 2. Double-integral quadrature against Umegaki at grid 128, plus the anchor.
Outcome criterion_normform() {
    Outcome out;
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 0.75;
    m(1, 1) = 0.25;
    const Real exact = relative_entropy(Density(m), maximally_mixed(2)).as_real();
    if (std::abs(exact - 0.1308123) > 1e-6) {
        out.pass = false;
        out.detail = "anchor D(diag(.75,.25)||I/2) off: " + std::to_string(exact);
        return out;
    }
    Real worst = 0;
    for (long t = 0; t < 100; ++t) {
        const int d = 2 + static_cast<int>(t) % 3;
        Density rho = random_density(d, Ensemble::HilbertSchmidt, 111000 + t);
        Density sigma = random_density(d, Ensemble::HilbertSchmidt, 222000 + t);
        const Real ref = relative_entropy(rho, sigma).as_real();
        const Real quad = relative_entropy_double_integral(rho, sigma, 128).as_real();
        worst = std::max(worst, std::abs(quad - ref) / std::max(std::abs(ref), 1e-12));
    }
    out.pass = worst < 1e-6;
    out.detail = "100 pairs at grid 128, worst relative error " + std::to_string(worst);
    return out;
}

// 3. keylem anchor and randomized sandwich at 1000 pairs.
Outcome criterion_keylem() {
    Outcome out;
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 0.75;
    m(1, 1) = 0.25;
    KeylemSandwich kl = keylem_sandwich(Density(m), maximally_mixed(2));
    const Real d0 = relative_entropy(Density(m), maximally_mixed(2)).as_real();
    if (std::abs(kl.lower - 0.1081977) > 1e-6 || std::abs(kl.upper - 0.25) > 1e-12 ||
        std::abs(kl.c - 1.5) > 1e-12 || kl.lower > d0 || d0 > kl.upper) {
        out.pass = false;
        out.detail = "anchor sandwich mismatch: (" + std::to_string(kl.lower) + ", " +
                     std::to_string(kl.upper) + ", c=" + std::to_string(kl.c) + ")";
        return out;
    }
    SuiteResult r = suite_registry().at("keylem")(6, 1000, 0x6b65796c, 1e-8);
    out.pass = r.violations.empty();
    out.detail = out.pass ? "anchor (0.1081977, 0.25, c=1.5) brackets 0.1308120; 1000 pairs clean"
                          : std::to_string(r.violations.size()) + " sandwich violations";
    return out;
}

// 4. MUB composition collapses to the scalar expectation; QF bound at SSA strength.
Outcome criterion_mub_composition() {
    Outcome out;
    Real worst = 0;
    for (int d = 2; d <= 5; ++d) {
        BasisPair bp = mub_pair(d);
        ChannelRep es = pinching_expectation(bp.S);
        ChannelRep et = pinching_expectation(bp.T);
        ChannelRep both = compose(es, et);
        ChannelRep scalar = block_expectation(SubalgebraBlocks::scalar(d));
        worst = std::max(worst, (both.choi() - scalar.choi()).norm());
        ExpectationWeight ew = max_expectation_weight(both, scalar);
        worst = std::max(worst, ew.zeta_star);
        Density rho = random_density(d, Ensemble::HilbertSchmidt, 4000 + d);
        QfUncertainty q = qf_uncertainty_bound(rho, bp);
        worst = std::max(worst, std::abs(q.cert.beta_used / q.cert.power - 1.0));
    }
    out.pass = worst < 1e-12;
    out.detail = "worst Choi distance / zeta* / coefficient deviation " + std::to_string(worst);
    return out;
}

// 5. Prop-18 sufficient zeta dominates the pencil zeta* per family.
Outcome criterion_near_dominance() {
    Outcome out;
    Real worst = 1e9;
    auto run_family = [&](const suites_detail::GroupInstance& gi, std::uint64_t base) {
        for (int t = 0; t < 100; ++t) {
            Rng rng(base + t);
            ChannelRep phi = suites_detail::biased_group_mixture(gi, rng, rng.uniform());
            const Real zs = near_zeta_sufficient(phi, gi.expectation, gi.blocks);
            ExpectationWeight ew = max_expectation_weight(phi, gi.expectation);
            worst = std::min(worst, zs - ew.zeta_star);
        }
    };
    run_family(suites_detail::weyl_group_instance(4), 51000);      // scalar
    run_family(suites_detail::cyclic_phase_instance(4), 52000);    // pinching
    run_family(suites_detail::factor_weyl_instance(2, 2), 53000);  // partial trace
    out.pass = worst >= -1e-9;
    out.detail = "min (zeta_sufficient - zeta*) over 300 channels = " + std::to_string(worst);
    return out;
}

// 6. Spectral anchors for cycles and complete graphs.
Outcome criterion_spectral_anchors() {
    Outcome out;
    Real worst = 0;
    for (int n = 4; n <= 32; ++n)
        worst = std::max(worst, std::abs(adjacency_gamma(build_graph("cycle:" + std::to_string(n))) -
                                         std::cos(2 * std::numbers::pi / n)));
    for (int n = 3; n <= 8; ++n)
        worst = std::max(
            worst, std::abs(adjacency_gamma(build_graph("complete:" + std::to_string(n))) - 1.0 / (n - 1)));
    out.pass = worst < 1e-10;
    out.detail = "worst spectral anchor deviation " + std::to_string(worst);
    return out;
}

// 7. Complete-graph Choi decomposition anchor. Unattainable in the n x n
// confusion-graph representation: supp Choi(E_G) strictly exceeds supp
// Choi(phi_graph), so the pencil weight is 0, not (1+1/|E|)/2. Reported
// honestly; registered as an expected failure in ctest.
Outcome criterion_complete_graph_weight() {
    Outcome out;
    std::ostringstream os;
    for (int n = 3; n <= 6; ++n) {
        GraphSpec g = build_graph("complete:" + std::to_string(n));
        ExpectationWeight ew = max_expectation_weight(phi_graph(g), graph_expectation(g));
        const Real target = 0.5 * (1.0 + 1.0 / g.edges.size());
        if (ew.w_star < target - 1e-10) out.pass = false;
        os << " K" << n << ": w*=" << ew.w_star << (ew.support_obstruction ? " (support obstruction)" : "")
           << ", target " << target << ";";
    }
    out.detail = os.str();
    return out;
}

// 8. Exact cycle walk extremes after 8 n^2 steps.
Outcome criterion_walk_extremes() {
    Outcome out;
    std::ostringstream os;
    for (int n : {8, 16, 32}) {
        WalkExtremes w = walk_extremes(build_graph("cycle:" + std::to_string(n)), 8L * n * n);
        os << " n=" << n << ": n*p_max=" << n * w.p_max << ", n*p_min=" << n * w.p_min << ";";
        if (n * w.p_max > 5.0 || n * w.p_min < 1.0 / 8) out.pass = false;
    }
    out.detail = (out.pass ? "claimed constants confirmed:" : "measured constants disagree:") + os.str();
    return out;
}

// 9. Simulated decay stays inside the certificate envelope (incl. qubit extension).
Outcome criterion_envelopes() {
    Outcome out;
    Real worst = -1e9;
    std::ostringstream os;
    for (const char* spec : {"cycle:4", "cycle:6", "complete:3", "complete:4", "paley:5"}) {
        GraphSpec g = build_graph(spec);
        MixCertificate cert = cmlsi_certificate(g);
        if (cert.trivial) {
            os << " " << spec << ": trivial;";
            continue;
        }
        const Mat l = graph_lindbladian(g);
        ChannelRep eg = graph_expectation(g);
        const std::vector<Real> times = linspace(0, 5.0 / cert.lambda_cert, 40);
        for (int t = 0; t < 50; ++t) {
            Density rho = random_density(g.n, Ensemble::HilbertSchmidt, 61000 + 131 * g.n + t);
            DecayCurve dc = decay_curve(l, rho, eg, times);
            for (size_t i = 0; i < times.size(); ++i)
                worst = std::max(worst,
                                 dc.values[i] - std::exp(-cert.lambda_cert * times[i]) * dc.values.front());
        }
        // complete-positivity flavor: qubit extension
        Mat lext = Mat::Zero(4 * g.n * g.n, 4 * g.n * g.n);
        for (auto& [i, j] : g.edges) {
            const Mat u = kron(transposition_unitary(g.n, i, j), Mat::Identity(2, 2));
            lext += Mat::Identity(lext.rows(), lext.cols()) - kron(u, u.conjugate());
        }
        lext /= Real(g.degree);
        ChannelRep egext = tensor_with_identity(eg, 2);
        for (int t = 0; t < 20; ++t) {
            Density rho = random_density(2 * g.n, Ensemble::HilbertSchmidt, 62000 + 131 * g.n + t);
            DecayCurve dc = decay_curve(lext, rho, egext, times);
            for (size_t i = 0; i < times.size(); ++i)
                worst = std::max(worst,
                                 dc.values[i] - std::exp(-cert.lambda_cert * times[i]) * dc.values.front());
        }
        os << " " << spec << " ok;";
    }
    out.pass = worst <= 1e-8;
    out.detail = "worst envelope excess " + std::to_string(worst) + ";" + os.str();
    return out;
}

// 10. Asymptotic-tightness trends.
Outcome criterion_trends() {
    Outcome out;
    std::ostringstream os;
    Real prev = -std::numeric_limits<Real>::infinity();
    bool mono = true;
    Real last = 0;
    for (int k = 1; k <= 6; ++k) {
        last = beta_c_zeta(2.0, std::pow(10.0, -k));
        if (last <= prev) mono = false;
        prev = last;
    }
    if (!mono || last <= 0.999) {
        out.pass = false;
        os << " beta trend broken (final " << last << ");";
    }
    prev = -1;
    for (Real th : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5}) {
        QfCertificate cert = qf_certificate(2.0, std::cos(th), 1);
        if (cert.trivial) {
            out.pass = false;
            os << " trivial certificate at theta=" << th << ";";
            continue;
        }
        const Real coef = cert.beta_used / cert.power;
        if (coef < prev - 1e-12) {
            out.pass = false;
            os << " coefficient dipped at theta=" << th << ";";
        }
        prev = coef;
    }
    Density rho = random_density(2, Ensemble::HilbertSchmidt, 77);
    if (std::abs(qf_uncertainty_bound(rho, mub_pair(2)).cert.beta_used - 1.0) > 1e-12) {
        out.pass = false;
        os << " MUB coefficient not 1;";
    }
    Real aprev = 0, ratio_worst = 0;
    for (Real c : {10.0, 100.0, 1000.0}) {
        QfCertificate q = qf_certificate(c, 0.5, 1);
        if (q.trivial) {
            out.pass = false;
            os << " trivial alpha at c=" << c << ";";
            continue;
        }
        if (aprev > 0) {
            const Real ratio = q.alpha / aprev;
            ratio_worst = std::max(ratio_worst, ratio);
            if (q.alpha <= aprev || ratio >= 10.0) {
                out.pass = false;
                os << " alpha(c) trend broken at c=" << c << ";";
            }
        }
        aprev = q.alpha;
    }
    out.detail = out.pass ? "beta->1, coefficient->1 toward MUB, alpha decade ratio <= " +
                                std::to_string(ratio_worst)
                          : os.str();
    return out;
}

// 11. Index estimate anchors at 10^4 samples.
Outcome criterion_index() {
    Outcome out;
    ChannelRep scalar = block_expectation(SubalgebraBlocks::scalar(4));
    IndexEstimate un = index_estimate(scalar, 4, 10000, false, 4242);
    IndexEstimate ext = index_estimate(scalar, 4, 10000, true, 4242);
    out.pass = un.lower_bound >= 3.9 && un.lower_bound <= 4.0 + 1e-8 && ext.lower_bound >= 15.5 &&
               ext.lower_bound <= 16.0 + 1e-8;
    out.detail =
        "unextended " + std::to_string(un.lower_bound) + ", extended " + std::to_string(ext.lower_bound);
    return out;
}

// 12. Classical restriction residuals.
Outcome criterion_classical() {
    Outcome out;
    Real worst = 0;
    for (const char* spec : {"cycle:4", "cycle:6", "complete:3", "complete:4", "paley:5", "paley:13"}) {
        GraphSpec g = build_graph(spec);
        Rng rng(9);
        for (int t = 0; t < 100; ++t)
            worst = std::max(worst, classical_restriction_check(g, rng.prob_vector(g.n)));
    }
    out.pass = worst < 1e-10;
    out.detail = "worst residual " + std::to_string(worst);
    return out;
}

// 13. Certificate ordering and scaling claims.
Outcome criterion_ordering() {
    Outcome out;
    std::ostringstream os;
    for (int n : {4, 6}) {
        MixCertificate kc = cmlsi_certificate(build_graph("complete:" + std::to_string(n)));
        MixCertificate cc = cmlsi_certificate(build_graph("cycle:" + std::to_string(n)));
        os << " n=" << n << ": lambda_K=" << kc.lambda_cert << " vs lambda_C=" << cc.lambda_cert << ";";
        if (kc.trivial || cc.trivial || kc.lambda_cert <= cc.lambda_cert) out.pass = false;
    }
    Real prev_cycle = 0, max_complete = 0;
    for (int n = 3; n <= 6; ++n) {
        const Real ac = cmlsi_certificate(build_graph("cycle:" + std::to_string(n))).alpha_sqf;
        const Real ak = cmlsi_certificate(build_graph("complete:" + std::to_string(n))).alpha_sqf;
        if (ac <= prev_cycle) out.pass = false;
        prev_cycle = ac;
        max_complete = std::max(max_complete, ak);
    }
    if (max_complete >= 5.0) out.pass = false;
    os << " cycle alpha grows to " << prev_cycle << ", complete alpha stays <= " << max_complete;
    out.detail = os.str();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"inequality suites (13 x d in 2..6 x 1000, tol 1e-8)", criterion_suites},
        {"normform quadrature vs Umegaki (1e-6 relative, grid 128)", criterion_normform},
        {"keylem sandwich anchor and 1000-pair sweep", criterion_keylem},
        {"MUB composition equals the scalar expectation (d = 2..5)", criterion_mub_composition},
        {"sufficient zeta dominates the Choi-pencil zeta*", criterion_near_dominance},
        {"spectral anchors: cycles cos(2pi/n), complete 1/(n-1)", criterion_spectral_anchors},
        {"complete-graph Choi weight >= (1+1/|E|)/2", criterion_complete_graph_weight},
        {"cycle walk extremes after 8 n^2 steps", criterion_walk_extremes},
        {"certificate decay envelopes (50 states + 20 extended)", criterion_envelopes},
        {"asymptotic-tightness trends", criterion_trends},
        {"index anchors at 10^4 samples", criterion_index},
        {"classical restriction residuals < 1e-10", criterion_classical},
        {"certificate ordering and scaling", criterion_ordering},
    };

    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const int num = static_cast<int>(i) + 1;
        if (only != 0 && only != num) continue;
        Outcome o = criteria[i].second();
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << num << "] " << criteria[i].first;
        if (!o.detail.empty()) std::cout << " -- " << o.detail;
        std::cout << std::endl;
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
