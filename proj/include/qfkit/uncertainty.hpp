#pragma once

#include "qfkit/bounds.hpp"
#include "qfkit/channels.hpp"
#include "qfkit/entropy.hpp"

#include <cmath>
#include <numbers>

namespace qfkit {

struct BasisPair {
    Mat S;
    Mat T;
    int dim = 0;

    BasisPair(Mat s, Mat t) : S(std::move(s)), T(std::move(t)), dim(static_cast<int>(S.rows())) {
        if (!is_unitary(S) || !is_unitary(T) || T.rows() != dim)
            throw std::invalid_argument("BasisPair: bases must be unitary and of equal dimension");
    }
};

inline Mat fourier_matrix(int d) {
    Mat f(d, d);
    const Real w = 2.0 * std::numbers::pi / d;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) f(j, k) = std::polar(1.0 / std::sqrt(Real(d)), w * j * k);
    return f;
}

inline BasisPair mub_pair(int d) { return BasisPair(Mat::Identity(d, d), fourier_matrix(d)); }

/// Angle-parametrized pair. d = 2: T = R(theta/2), so xi = sin^2(theta/2) and
/// the composite pinching weight is zeta = cos(theta). d >= 3: T interpolates
/// the Fourier basis, T(theta) = F^(2 theta / pi) using F^4 = 1.
inline BasisPair rotated_pair(int d, Real theta) {
    if (d == 2) {
        Mat t(2, 2);
        const Real h = theta / 2;
        t << std::cos(h), -std::sin(h), std::sin(h), std::cos(h);
        return BasisPair(Mat::Identity(2, 2), t);
    }
    const Mat f = fourier_matrix(d);
    // spectral projectors of F onto eigenvalues i^k via the closed form
    // P_k = (1/4) sum_m (lambda_k^* F)^m, valid because F^4 = 1
    std::vector<Mat> powers{Mat::Identity(d, d), f, f * f, f * f * f};
    Mat t = Mat::Zero(d, d);
    for (int k = 0; k < 4; ++k) {
        const Cplx lam = std::polar(1.0, std::numbers::pi / 2 * k);
        Mat p = Mat::Zero(d, d);
        for (int m = 0; m < 4; ++m) p += std::pow(std::conj(lam), m) * powers[m];
        p /= 4.0;
        Real arg = std::numbers::pi / 2 * k;
        if (arg > std::numbers::pi) arg -= 2 * std::numbers::pi;  // principal branch
        t += std::polar(1.0, (2 * theta / std::numbers::pi) * arg) * p;
    }
    return BasisPair(Mat::Identity(d, d), t);
}

/// xi = min_{i,j} |<i_S|j_T>|^2, always in [0, 1/d].
inline Real basis_overlap_xi(const BasisPair& bp) {
    Real xi = 1.0;
    for (int i = 0; i < bp.dim; ++i)
        for (int j = 0; j < bp.dim; ++j) xi = std::min(xi, std::norm(bp.S.col(i).dot(bp.T.col(j))));
    return xi;
}

inline Real basis_overlap_max(const BasisPair& bp) {
    Real mx = 0.0;
    for (int i = 0; i < bp.dim; ++i)
        for (int j = 0; j < bp.dim; ++j) mx = std::max(mx, std::norm(bp.S.col(i).dot(bp.T.col(j))));
    return mx;
}

struct BoundPair {
    Real lhs = 0;
    Real rhs = 0;
};

inline Real basis_entropy_sum(const Density& rho, const BasisPair& bp) {
    const ChannelRep es = pinching_expectation(bp.S);
    const ChannelRep et = pinching_expectation(bp.T);
    return relative_entropy(rho, es(rho)).as_real() + relative_entropy(rho, et(rho)).as_real();
}

/// Maassen-Uffink: lhs = D(rho||E_S rho) + D(rho||E_T rho),
/// rhs = D(rho||1/d) - ln(d max overlap).
inline BoundPair maassen_uffink_bound(const Density& rho, const BasisPair& bp) {
    const int d = bp.dim;
    const Real lhs = basis_entropy_sum(rho, bp);
    const Real rhs = relative_entropy(rho, maximally_mixed(d)).as_real() - std::log(d * basis_overlap_max(bp));
    return {lhs, rhs};
}

inline Real bardet_coefficient(const BasisPair& bp) {
    const int d = bp.dim;
    Real dev = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            dev = std::max(dev, std::abs(std::norm(bp.S.col(i).dot(bp.T.col(j))) - 1.0 / d));
    return 1.0 - 2.0 * d * dev;
}

/// rhs uses the raw (possibly negative) coefficient; clamping is a reporting concern.
inline BoundPair bardet_bound(const Density& rho, const BasisPair& bp) {
    const Real lhs = basis_entropy_sum(rho, bp);
    const Real rhs = bardet_coefficient(bp) * relative_entropy(rho, maximally_mixed(bp.dim)).as_real();
    return {lhs, rhs};
}

struct QfUncertainty {
    Real lhs = 0;
    Real rhs = 0;
    QfCertificate cert;
    Real zeta = 0;  // analytic 1 - d xi
};

/// Quasi-factorization uncertainty bound on A (x) B, with the analytic
/// zeta = 1 - d xi. epsilon <= 0 picks the grid-optimized epsilon.
inline QfUncertainty qf_uncertainty_bound(const Density& rho_ab, const BasisPair& bp, Real epsilon = 0) {
    const int d = bp.dim;
    if (rho_ab.dim() % d != 0) throw std::invalid_argument("qf_uncertainty_bound: rho dimension not divisible by d");
    const int db = rho_ab.dim() / d;
    const Real xi = basis_overlap_xi(bp);
    if (xi <= 0)
        throw std::invalid_argument(
            "qf_uncertainty_bound: xi = 0 (bases share a vector); the intersection algebra changes "
            "discontinuously");
    const Real zeta = std::max(1.0 - d * xi, 0.0);

    const ChannelRep es = pinching_expectation(bp.S);
    const ChannelRep et = pinching_expectation(bp.T);
    const ChannelRep scalar_e = block_expectation(SubalgebraBlocks::scalar(d));
    // numeric decomposition weight can only confirm the analytic zeta
    if (zeta > 0) {
        const ExpectationWeight ew = max_expectation_weight(compose(es, et), scalar_e);
        if (!ew.support_obstruction && ew.zeta_star > zeta + 1e-9)
            throw std::runtime_error("qf_uncertainty_bound: numeric zeta exceeds analytic bound");
    }

    const ChannelRep es_ext = db > 1 ? tensor_with_identity(es, db) : es;
    const ChannelRep et_ext = db > 1 ? tensor_with_identity(et, db) : et;
    const Real lhs =
        relative_entropy(rho_ab, es_ext(rho_ab)).as_real() + relative_entropy(rho_ab, et_ext(rho_ab)).as_real();

    const Mat rho_b = partial_trace(rho_ab.mat(), {d, db}, {0});
    Mat target = kron(Mat::Identity(d, d) / Real(d), rho_b);
    const Real base = relative_entropy(rho_ab, Density((target + target.adjoint()) / 2.0)).as_real();

    QfCertificate cert;
    if (zeta <= 1e-15) {
        cert = {1.0, 0.0, 1, 1.0, false};  // commuting-composition case, SSA strength
    } else {
        const Real c = db > 1 ? Real(d) * Real(d) : Real(d);
        if (epsilon > 0) {
            if (epsilon > zeta) throw std::invalid_argument("qf_uncertainty_bound: epsilon must be <= zeta");
            cert = qf_certificate(c, zeta, 1, {epsilon});
        } else {
            cert = qf_certificate(c, zeta, 1);
        }
    }
    const Real rhs = cert.trivial ? 0.0 : (cert.beta_used / cert.power) * base;
    return {lhs, rhs, cert, zeta};
}

}  // namespace qfkit
