#pragma once

#include "qfkit/bounds.hpp"
#include "qfkit/channels.hpp"
#include "qfkit/entropy.hpp"
#include "qfkit/graphmix.hpp"
#include "qfkit/majorize.hpp"
#include "qfkit/rng.hpp"
#include "qfkit/uncertainty.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace qfkit {

struct Violation {
    std::string suite;
    std::string digest;
    Real slack = 0;
};

struct SuiteResult {
    std::string name;
    int dim = 0;
    long trials = 0;
    Real max_violation = 0;
    std::vector<Violation> violations;
};

namespace suites_detail {

inline std::string fnv_digest(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

struct Recorder {
    SuiteResult res;
    Real tol;

    Recorder(std::string name, int dim, long trials, Real tol_) : tol(tol_) {
        res.name = std::move(name);
        res.dim = dim;
        res.trials = trials;
    }
    /// margin must stay >= -tol; smaller means a violation of size (-margin - tol).
    void check(Real margin, const std::string& instance) {
        if (margin < -tol) {
            res.violations.push_back({res.name, fnv_digest(instance), margin});
            res.max_violation = std::max(res.max_violation, -margin - tol);
        }
    }
    SuiteResult done() { return res; }
};

inline std::uint64_t trial_seed(std::uint64_t seed, long trial) {
    // splitmix-style stream per trial
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (trial + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Unitary mixture over a finite group, biased toward the group average so the
/// decomposition weight stays in multiplicative-bound territory.
struct GroupInstance {
    std::vector<Mat> unitaries;
    ChannelRep expectation;  // group average
    SubalgebraBlocks blocks;
};

inline Mat weyl_x(int d) {
    Mat x = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) x((i + 1) % d, i) = 1;
    return x;
}

inline Mat weyl_z(int d) {
    Mat z = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) z(i, i) = std::polar(1.0, 2 * std::numbers::pi * i / d);
    return z;
}

inline GroupInstance weyl_group_instance(int d) {
    std::vector<Mat> us;
    const Mat x = weyl_x(d), z = weyl_z(d);
    Mat xa = Mat::Identity(d, d);
    for (int a = 0; a < d; ++a) {
        Mat w = xa;
        for (int b = 0; b < d; ++b) {
            us.push_back(w);
            w = w * z;
        }
        xa = xa * x;
    }
    return {us, group_average_expectation(us), SubalgebraBlocks::scalar(d)};
}

inline GroupInstance cyclic_phase_instance(int d) {
    std::vector<Mat> us;
    const Mat z = weyl_z(d);
    Mat w = Mat::Identity(d, d);
    for (int b = 0; b < d; ++b) {
        us.push_back(w);
        w = w * z;
    }
    return {us, group_average_expectation(us), SubalgebraBlocks::pinching(d)};
}

inline GroupInstance factor_weyl_instance(int a, int b) {
    std::vector<Mat> us;
    const Mat ia = Mat::Identity(a, a);
    const Mat x = weyl_x(b), z = weyl_z(b);
    Mat xa = Mat::Identity(b, b);
    for (int p = 0; p < b; ++p) {
        Mat w = xa;
        for (int q = 0; q < b; ++q) {
            us.push_back(kron(ia, w));
            w = w * z;
        }
        xa = xa * x;
    }
    return {us, group_average_expectation(us), SubalgebraBlocks::factor(a, b)};
}

inline GroupInstance group_instance_for(int dim, int which) {
    switch (which % 3) {
        case 0: return weyl_group_instance(dim);
        case 1: return cyclic_phase_instance(dim);
        default:
            for (int a = 2; a * a <= dim; ++a)
                if (dim % a == 0) return factor_weyl_instance(a, dim / a);
            return weyl_group_instance(dim);  // prime dim: no proper factor split
    }
}

/// Mixture sum (1-s) * uniform + s * random over the group elements.
inline ChannelRep biased_group_mixture(const GroupInstance& gi, Rng& rng, Real s) {
    const size_t n = gi.unitaries.size();
    std::vector<Real> extra = rng.prob_vector(static_cast<int>(n));
    std::vector<std::pair<Real, Mat>> mix;
    Real acc = 0;
    for (size_t i = 0; i < n; ++i) {
        Real w = (1 - s) / Real(n) + s * extra[i];
        if (i + 1 == n) w = 1.0 - acc;  // exact normalization
        acc += w;
        mix.emplace_back(w, gi.unitaries[i]);
    }
    return ChannelRep::from_mixture(std::move(mix));
}

inline Density mix_density(const Mat& a, const Mat& b, Real t) {
    Mat m = (1 - t) * a + t * b;
    return Density((m + m.adjoint()) / 2.0);
}

}  // namespace suites_detail

using SuiteFn = std::function<SuiteResult(int dim, long trials, std::uint64_t seed, Real tol)>;

namespace suites {

using namespace suites_detail;

inline SuiteResult ssa(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("ssa", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        const bool wide = t % 2;  // alternate (2,2,2) and (2,3,2)
        const int db = wide ? 3 : 2;
        Density rho = random_density(2 * db * 2, Ensemble::HilbertSchmidt, trial_seed(seed, t));
        rec.check(ssa_gap(rho, 2, db, 2), "ssa:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult subadd(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("subadd", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        Density rho = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density omega = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        ChannelRep e = pinching_expectation(rng.haar_unitary(dim));
        rec.check(subadd_gap(rho, omega, e), "subadd:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult chain(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("chain", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        ChannelRep e = [&]() {
            if (t % 2 == 0) return pinching_expectation(rng.haar_unitary(dim));
            // weighted block expectation on a random basis
            SubalgebraBlocks sb = SubalgebraBlocks::scalar(dim);
            sb.basis_change = rng.haar_unitary(dim);
            sb.blocks[0].weight = random_density(dim, Ensemble::HilbertSchmidt, rng.raw()).mat();
            return weighted_expectation(sb);
        }();
        Density rho = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density omega = e(random_density(dim, Ensemble::HilbertSchmidt, rng.raw()));
        rec.check(-chain_rule_residual(rho, omega, e), "chain:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult keylem(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("keylem", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        Density sigma = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density rho = t % 3 ? random_density(dim, Ensemble::HilbertSchmidt, rng.raw())
                            : random_density(dim, Ensemble::RankK, rng.raw(), std::max(1, dim - 1));
        KeylemSandwich kl = keylem_sandwich(rho, sigma);
        const Real d = relative_entropy(rho, sigma).as_real();
        if (kl.infinite || !std::isfinite(d)) continue;
        rec.check(std::min(d - kl.lower, kl.upper - d), "keylem:" + std::to_string(t));
    }
    return rec.done();
}

/// Quadrature vs Umegaki at grid 128; margin is 1e-6 minus the relative error.
inline SuiteResult normform(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("normform", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Density rho = t == 0 ? Density((Mat(2, 2) << 0.75, 0, 0, 0.25).finished())
                             : random_density(dim, Ensemble::HilbertSchmidt, trial_seed(seed, t));
        Density sigma = t == 0 ? maximally_mixed(2)
                               : random_density(dim, Ensemble::HilbertSchmidt, trial_seed(seed, t) ^ 0xabcdef);
        const Real exact = relative_entropy(rho, sigma).as_real();
        const Real quad = relative_entropy_double_integral(rho, sigma, 128).as_real();
        const Real rel = std::abs(quad - exact) / std::max(std::abs(exact), 1e-12);
        rec.check(1e-6 - rel, "normform:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult wnorm_triangle(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("wnorm-triangle", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        Density rho = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density sigma = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Mat x = rng.ginibre(dim, dim), y = rng.ginibre(dim, dim);
        const Real nx = std::sqrt(inv_weighted_norm_sq(x, rho).as_real());
        const Real ny = std::sqrt(inv_weighted_norm_sq(y, rho).as_real());
        const Real nxy = std::sqrt(inv_weighted_norm_sq(x + y, rho).as_real());
        Real margin = nx + ny - nxy;
        // absolute homogeneity
        const Cplx a(rng.gaussian(), rng.gaussian());
        const Real hom = inv_weighted_norm_sq(a * x, rho).as_real() -
                         std::norm(a) * inv_weighted_norm_sq(x, rho).as_real();
        margin = std::min(margin, tol - std::abs(hom) / std::max(1.0, std::abs(hom) + nx * nx));
        // norm comparison: rho <= c sigma implies ||X||_{sigma^-1}^2 <= c ||X||_{rho^-1}^2
        const Real c = std::max(loewner_pencil_max(rho.mat(), sigma.mat()), 1e-12);
        margin = std::min(margin, (c * inv_weighted_norm_sq(x, rho).as_real() -
                                   inv_weighted_norm_sq(x, sigma).as_real()) /
                                      std::max(1.0, c));
        rec.check(margin, "wnorm:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult thmrelent(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("thmrelent", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        auto [rho, sigma] = random_majorized_pair(dim, trial_seed(seed, t));
        ThmRelentSlacks s = thmrelent_check(rho, sigma, 0.5, 0.5);
        rec.check(std::min(s.slack, s.worstsig_slack), "thmrelent:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult worstsig(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("worstsig", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        auto [rho, sigma] = random_majorized_pair(dim, rng.raw());
        const Real zeta = rng.uniform();
        const Mat mixed = Mat::Identity(dim, dim) / Real(dim);
        const Real lhs = relative_entropy(rho, mix_density(mixed, sigma.mat(), zeta)).as_real();
        const Real rhs = relative_entropy(rho, mix_density(mixed, rho.mat(), zeta)).as_real();
        rec.check(lhs - rhs, "worstsig:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult flatten(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("flatten", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        if (t % 10 == 9) {
            // end-to-end: cascade from rho^zeta to sigma^zeta, every move monotone
            auto [rho_d, sigma_d] = random_majorized_pair(dim, rng.raw());
            ProbVector pr = prob_from_eigenvalues(spectral_decompose(rho_d.mat()).eigenvalues);
            ProbVector ps = prob_from_eigenvalues(spectral_decompose(sigma_d.mat()).eigenvalues);
            const Real zeta = std::vector<Real>{0.1, 0.5, 0.9}[t % 3];
            auto shrink = [&](const ProbVector& v) {
                std::vector<Real> e(v.entries());
                for (Real& x : e) x = (1 - zeta) / dim + zeta * x;
                return ProbVector(e);
            };
            ProbVector src = shrink(pr), dst = shrink(ps);
            if (!majorizes(src, dst, 1e-9)) continue;
            MoveList moves = cascade_redistribute(src, dst);
            std::vector<Real> omega = src.entries();
            Real margin = 1;
            for (const Move& mv : moves) {
                margin = std::min(margin, flatten_step_delta(pr, omega, mv.from, mv.to, mv.delta));
                omega[mv.from] -= mv.delta;
                omega[mv.to] += mv.delta;
            }
            std::vector<Real> replay = replay_moves(src, moves);
            Real err = 0;
            for (size_t i = 0; i < replay.size(); ++i) err = std::max(err, std::abs(replay[i] - dst[i]));
            margin = std::min(margin, 1e-10 - err);
            // chained conclusion: D(rho||sigma^zeta) >= D(rho||rho^zeta)
            margin = std::min(margin, classical_rel_entropy(pr.entries(), dst.entries()) -
                                          classical_rel_entropy(pr.entries(), src.entries()));
            rec.check(margin, "flatten-cascade:" + std::to_string(t));
            continue;
        }
        ProbVector rho(rng.prob_vector(dim));
        for (int attempt = 0; attempt < 64; ++attempt) {
            std::vector<Real> omega = rng.prob_vector(dim);
            bool found = false;
            for (int i = 0; i < dim && !found; ++i)
                for (int j = 0; j < dim && !found; ++j) {
                    if (i == j || rho[i] < rho[j]) continue;
                    if (rho[i] * omega[j] < rho[j] * omega[i]) continue;
                    const Real delta = rng.uniform() * omega[i] * 0.95;
                    rec.check(flatten_step_delta(rho, omega, i, j, delta), "flatten:" + std::to_string(t));
                    found = true;
                }
            if (found) break;
        }
    }
    return rec.done();
}

inline SuiteResult revconv(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("revconv", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        Density rho = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density sigma = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density eta = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        const Real zeta = 0.05 + 0.85 * rng.uniform();
        const Real c = std::max(loewner_pencil_max(eta.mat(), sigma.mat()), 1.0) + 1e-9;
        Density omega = mix_density(sigma.mat(), eta.mat(), zeta);
        RevconvSlacks s = revconv_check(rho, sigma, omega, c, zeta);
        rec.check(std::min(s.slack1, s.slack2), "revconv:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult corsimpleg(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("corsimpleg", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        GroupInstance gi = group_instance_for(dim, static_cast<int>(t));
        const Real c = complete_index_bound(gi.expectation) + 1e-9;
        const Real s_cap = 0.5 / (6.0 * keylem_g(c) + 10.0);
        ChannelRep phi = biased_group_mixture(gi, rng, rng.uniform() * s_cap);
        Density rho = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        ExpectationWeight ew = max_expectation_weight(phi, gi.expectation);
        if (ew.support_obstruction || ew.zeta_star <= 0 || ew.zeta_star >= 1) continue;
        const Real beta = beta_c_zeta(c, ew.zeta_star);
        if (beta <= 0) continue;
        Density erho = gi.expectation(rho);
        Density mixed = mix_density(erho.mat(), phi(rho).mat(), ew.zeta_star);
        const Real lhs = relative_entropy(rho, mixed).as_real();
        const Real rhs = beta * relative_entropy(rho, erho).as_real();
        rec.check(lhs - rhs, "corsimpleg:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult ephi(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("ephi", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        GroupInstance gi = group_instance_for(dim, static_cast<int>(t));
        ChannelRep phi = biased_group_mixture(gi, rng, rng.uniform() * 0.5);
        Density rho = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density erho = gi.expectation(rho);
        Density prho = phi(rho);
        const Real kappa = loewner_pencil_min(prho.mat(), erho.mat());
        if (kappa <= 1e-6) continue;
        const Real c =
            std::max({loewner_pencil_max(rho.mat(), erho.mat()), loewner_pencil_max(prho.mat(), erho.mat()), 1.0}) + 1e-9;
        // hypothesis D(phi rho || E rho) <= D(rho || E rho) holds by data processing here
        const Real bound = ephi_constant(c, kappa) * relative_entropy(rho, erho).as_real();
        rec.check(bound - relative_entropy(rho, prho).as_real(), "ephi:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult near(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("near", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        GroupInstance gi = group_instance_for(dim, static_cast<int>(t));
        ChannelRep phi = biased_group_mixture(gi, rng, rng.uniform());
        const Real zsuff = near_zeta_sufficient(phi, gi.expectation, gi.blocks);
        ExpectationWeight ew = max_expectation_weight(phi, gi.expectation);
        rec.check(zsuff - ew.zeta_star, "near:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult qf_mub(int dim, long trials, std::uint64_t seed, Real tol) {
    const int d = std::clamp(dim, 2, 5);
    Recorder rec("qf-mub", d, trials, tol);
    BasisPair bp = mub_pair(d);
    ChannelRep es = pinching_expectation(bp.S), et = pinching_expectation(bp.T);
    for (long t = 0; t < trials; ++t) {
        Density rho = random_density(d, Ensemble::HilbertSchmidt, trial_seed(seed, t));
        const Real lhs =
            relative_entropy(rho, es(rho)).as_real() + relative_entropy(rho, et(rho)).as_real();
        rec.check(lhs - relative_entropy(rho, maximally_mixed(d)).as_real(), "qf-mub:" + std::to_string(t));
    }
    return rec.done();
}

inline SuiteResult dataproc(int dim, long trials, std::uint64_t seed, Real tol) {
    Recorder rec("dataproc", dim, trials, tol);
    for (long t = 0; t < trials; ++t) {
        Rng rng(trial_seed(seed, t));
        Density rho = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        Density sigma = random_density(dim, Ensemble::HilbertSchmidt, rng.raw());
        std::vector<Real> w = rng.prob_vector(dim);
        std::vector<std::pair<Real, Mat>> mix;
        for (int i = 0; i < dim; ++i) mix.emplace_back(w[i], rng.haar_unitary(dim));
        ChannelRep phi = ChannelRep::from_mixture(std::move(mix));
        const Real before = relative_entropy(rho, sigma).as_real();
        const Real after = relative_entropy(phi(rho), phi(sigma)).as_real();
        rec.check(before - after, "dataproc:" + std::to_string(t));
    }
    return rec.done();
}

}  // namespace suites

inline const std::map<std::string, SuiteFn>& suite_registry() {
    static const std::map<std::string, SuiteFn> reg = {
        {"ssa", suites::ssa},
        {"subadd", suites::subadd},
        {"chain", suites::chain},
        {"keylem", suites::keylem},
        {"normform", suites::normform},
        {"wnorm-triangle", suites::wnorm_triangle},
        {"thmrelent", suites::thmrelent},
        {"worstsig", suites::worstsig},
        {"flatten", suites::flatten},
        {"revconv", suites::revconv},
        {"corsimpleg", suites::corsimpleg},
        {"ephi", suites::ephi},
        {"near", suites::near},
        {"qf-mub", suites::qf_mub},
        {"dataproc", suites::dataproc},
    };
    return reg;
}

}  // namespace qfkit
