#pragma once

#include "qfkit/channels.hpp"
#include "qfkit/entropy.hpp"
#include "qfkit/majorize.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace qfkit {

/// Admissible zeta of the majorized-perturbation theorem:
/// a * min{ (1-b)/(d + a(1-b) + 1), b/((1-ab)d + ab + 1) }, with beta~ = 1 - a.
inline Real tilde_zeta_admissible(int d, Real a, Real b) {
    if (d < 1 || a < 0 || a > 1 || b <= 0 || b >= 1)
        throw std::invalid_argument("tilde_zeta_admissible: need d >= 1, a in [0,1], b in (0,1)");
    const Real first = (1 - b) / (d + a * (1 - b) + 1);
    const Real second = b / ((1 - a * b) * d + a * b + 1);
    return a * std::min(first, second);
}

inline Real approx_zeta_max(int d) {
    if (d < 1) throw std::invalid_argument("approx_zeta_max: d must be >= 1");
    return 15.0 / (25.0 * d + 56.0);
}

/// 1 - 32(d+1) zeta / (15 + (7d - 24) zeta), valid for zeta < approx_zeta_max(d).
inline Real approx_beta(int d, Real zeta) {
    if (zeta < 0 || zeta >= approx_zeta_max(d))
        throw std::invalid_argument("approx_beta: zeta outside [0, 15/(25d+56))");
    return 1.0 - 32.0 * (d + 1) * zeta / (15.0 + (7.0 * d - 24.0) * zeta);
}

/// beta_{c,zeta} of the multiplicative subalgebra-perturbation corollary.
/// May be <= 0; callers flag trivial certificates themselves.
inline Real beta_c_zeta(Real c, Real zeta) {
    if (c < 1) c = 1;
    const Real g = keylem_g(c);  // (c-1)^2/(c(ln c - 1)+1), series near c = 1
    const Real num = 1.0 - 3.0 * zeta * (2.0 + zeta) * g - 8.0 * zeta - 2.0 * zeta * zeta;
    const Real den = 1.0 + zeta * (c + 1.0) + 2.0 * zeta * zeta * (c - 1.0);
    return num / den;
}

/// Coefficient a*g(c)/kappa of the reverse comparison; a = 4 in general,
/// a = 1 + 2 sqrt(b) + b for the structured mixture case.
inline Real ephi_constant(Real c, Real kappa, std::optional<Real> structured_b = std::nullopt) {
    if (c < 1 || kappa <= 0) throw std::invalid_argument("ephi_constant: need c >= 1, kappa > 0");
    Real a = 4.0;
    if (structured_b) {
        if (*structured_b < 0 || *structured_b > 1)
            throw std::invalid_argument("ephi_constant: structured_b must be in [0,1]");
        a = 1.0 + 2.0 * std::sqrt(*structured_b) + *structured_b;
    }
    return a * keylem_g(c) / kappa;
}

struct RevconvSlacks {
    Real slack1 = 0;
    Real slack2 = 0;
    Density eta;
};

/// Checks the triangle-like comparison on a sandwiched triple. Validates the
/// Loewner sandwich, recovers eta = (omega - (1-zeta) sigma)/zeta as a density,
/// and returns RHS - LHS for both forms of the bound.
inline RevconvSlacks revconv_check(const Density& rho, const Density& sigma, const Density& omega, Real c,
                                   Real zeta) {
    if (c < 1 || zeta <= 0 || zeta >= 1) throw std::invalid_argument("revconv_check: need c >= 1, zeta in (0,1)");
    if (!loewner_leq((1 - zeta) * sigma.mat(), omega.mat(), 1e-9) ||
        !loewner_leq(omega.mat(), (1 + zeta * (c - 1)) * sigma.mat(), 1e-9))
        throw std::invalid_argument("revconv_check: sandwich (1-zeta) sigma <= omega <= (1+zeta(c-1)) sigma fails");
    Mat eta_m = (omega.mat() - (1 - zeta) * sigma.mat()) / zeta;
    Density eta((eta_m + eta_m.adjoint()) / 2.0);

    const Real d_rs = relative_entropy(rho, sigma).as_real();
    const Real d_ro = relative_entropy(rho, omega).as_real();
    const Real d_re = relative_entropy(rho, eta).as_real();
    const Real d_es = relative_entropy(eta, sigma).as_real();

    const Real lhs = (1 - zeta) * (1 - zeta) * d_rs;
    const Real coeff = 1 + zeta * (c + 1) + 2 * zeta * zeta * (c - 1);
    const Real rhs1 = coeff * d_ro + zeta * (2 + zeta) * c * d_re;
    const Real rhs2 = coeff * d_ro + 3 * zeta * (2 + zeta) * (1 + keylem_g(c)) * d_es;
    return {rhs1 - lhs, rhs2 - lhs, eta};
}

struct ThmRelentSlacks {
    Real slack = 0;           // D(rho || (1-z)I/d + z sigma) - (1-a) D(rho || I/d)
    Real worstsig_slack = 0;  // D(rho || (1-z)I/d + z sigma) - D(rho || (1-z)I/d + z rho)
    Real zeta = 0;
};

inline ThmRelentSlacks thmrelent_check(const Density& rho, const Density& sigma, Real a, Real b) {
    const int d = rho.dim();
    if (sigma.dim() != d) throw std::invalid_argument("thmrelent_check: dimension mismatch");
    ProbVector pr = prob_from_eigenvalues(spectral_decompose(rho.mat()).eigenvalues);
    ProbVector ps = prob_from_eigenvalues(spectral_decompose(sigma.mat()).eigenvalues);
    if (!majorizes(pr, ps, 1e-9)) throw std::invalid_argument("thmrelent_check: rho does not majorize sigma");
    const Real zeta = tilde_zeta_admissible(d, a, b);
    const Mat mixed = Mat::Identity(d, d) / Real(d);
    Density mix_sigma(((1 - zeta) * mixed + zeta * sigma.mat() + ((1 - zeta) * mixed + zeta * sigma.mat()).adjoint()) / 2.0);
    Density mix_rho(((1 - zeta) * mixed + zeta * rho.mat() + ((1 - zeta) * mixed + zeta * rho.mat()).adjoint()) / 2.0);
    const Real lhs = relative_entropy(rho, mix_sigma).as_real();
    const Real mid = relative_entropy(rho, mix_rho).as_real();
    const Real base = relative_entropy(rho, maximally_mixed(d)).as_real();
    return {lhs - (1 - a) * base, lhs - mid, zeta};
}

/// Optional 11x11 grid search for the (a, b) pair maximizing the admissible zeta.
inline std::pair<Real, Real> tilde_zeta_best_ab(int d) {
    Real best = -1, ba = 0.5, bb = 0.5;
    for (int i = 1; i <= 11; ++i)
        for (int j = 1; j <= 11; ++j) {
            const Real a = i / 12.0, b = j / 12.0;
            const Real z = tilde_zeta_admissible(d, a, b);
            if (z > best) {
                best = z;
                ba = a;
                bb = b;
            }
        }
    return {ba, bb};
}

struct Schedule {
    // (weight, sequence of 0-based channel indices, applied left to right)
    std::vector<std::pair<Real, std::vector<int>>> entries;
};

struct ScheduleResult {
    ChannelRep psi;
    std::vector<int> k_counts;  // per-index maximum occurrence over sequences
};

inline ScheduleResult schedule_compose(const std::vector<ChannelRep>& es, const Schedule& schedule) {
    if (es.empty() || schedule.entries.empty()) throw std::invalid_argument("schedule_compose: empty schedule");
    const int d = es.front().dim();
    Real wsum = 0;
    for (const auto& [w, seq] : schedule.entries) {
        wsum += w;
        for (int idx : seq)
            if (idx < 0 || idx >= static_cast<int>(es.size()))
                throw std::invalid_argument("schedule_compose: index out of range");
    }
    if (std::abs(wsum - 1.0) > 1e-12) throw std::invalid_argument("schedule_compose: weights do not sum to 1");
    Mat total = Mat::Zero(d * d, d * d);
    std::vector<int> kmax(es.size(), 0);
    for (const auto& [w, seq] : schedule.entries) {
        Mat s = Mat::Identity(d * d, d * d);
        std::vector<int> count(es.size(), 0);
        for (int idx : seq) {
            s = es[idx].superop() * s;  // applied left to right
            ++count[idx];
        }
        for (size_t j = 0; j < es.size(); ++j) kmax[j] = std::max(kmax[j], count[j]);
        total += w * s;
    }
    Mat j = superop_to_choi(total, d);
    return {ChannelRep::from_choi((j + j.adjoint()) / 2.0), kmax};
}

struct QfCertificate {
    Real alpha = 0;
    Real epsilon_used = 0;
    int power = 0;
    Real beta_used = 0;
    bool trivial = true;
};

/// Default epsilon grid {zeta^m}. The spec depth ceil(2 ln(max(c,e))/ln(1/zeta))+4
/// is a floor; the grid keeps extending while alpha still improves, since for
/// zeta near 1 the first useful epsilon can sit far deeper.
inline std::vector<Real> default_epsilon_grid(Real c, Real zeta) {
    if (zeta <= 0 || zeta >= 1) throw std::invalid_argument("default_epsilon_grid: zeta must be in (0,1)");
    const Real lz = std::log(1.0 / zeta);
    const long floor_depth = static_cast<long>(std::ceil(2.0 * std::log(std::max(c, std::exp(1.0))) / lz)) + 4;
    std::vector<Real> grid;
    Real eps = 1.0;
    Real best_alpha = std::numeric_limits<Real>::infinity();
    long since_improved = 0;
    for (long m = 1; m <= 1000000; ++m) {
        eps *= zeta;
        grid.push_back(eps);
        const Real beta = beta_c_zeta(c, eps);
        if (beta > 0) {
            const Real alpha = m / beta;
            if (alpha < best_alpha) {
                best_alpha = alpha;
                since_improved = 0;
            } else {
                ++since_improved;
            }
        }
        if (m >= floor_depth && since_improved > 200) break;
        if (eps < 1e-300) break;
    }
    return grid;
}

/// Grid-iterated quasi-factorization constant: minimize k_total * ceil(log_zeta eps) / beta_{c,eps}.
inline QfCertificate qf_certificate(Real c, Real zeta, int k_total, const std::vector<Real>& epsilon_grid) {
    if (zeta <= 0 || zeta >= 1 || c < 1) throw std::invalid_argument("qf_certificate: need zeta in (0,1), c >= 1");
    if (epsilon_grid.empty()) throw std::invalid_argument("qf_certificate: empty epsilon grid");
    QfCertificate out;
    for (Real eps : epsilon_grid) {
        if (eps > zeta + 1e-15 || eps <= 0) throw std::invalid_argument("qf_certificate: grid entry outside (0, zeta]");
        const int power = static_cast<int>(std::ceil(std::log(eps) / std::log(zeta) - 1e-12));
        const Real beta = beta_c_zeta(c, eps);
        if (beta <= 0) continue;
        const Real alpha = Real(k_total) * power / beta;
        if (out.trivial || alpha < out.alpha) out = {alpha, eps, power, beta, false};
    }
    return out;
}

inline QfCertificate qf_certificate(Real c, Real zeta, int k_total) {
    return qf_certificate(c, zeta, k_total, default_epsilon_grid(c, zeta));
}

}  // namespace qfkit
