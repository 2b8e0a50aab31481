#pragma once

#include "qfkit/core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace qfkit {

/// Nonnegative real with an explicit +infinity sentinel (never a float overflow).
struct EntropyValue {
    Real value = 0;
    bool infinite = false;

    static EntropyValue inf() { return {0, true}; }
    static EntropyValue finite(Real v) {
        // clamp numerical negatives within tolerance of 0
        if (v < 0 && v > -1e-9) v = 0;
        return {v, false};
    }
    Real as_real() const { return infinite ? std::numeric_limits<Real>::infinity() : value; }
};

inline EntropyValue operator+(const EntropyValue& a, const EntropyValue& b) {
    if (a.infinite || b.infinite) return EntropyValue::inf();
    return {a.value + b.value, false};
}

namespace detail {

inline Real xlogx(Real x) { return x > 0 ? x * std::log(x) : 0.0; }

/// Fraction of rho's mass outside sigma's support, and sigma's support data.
inline bool support_contained(const Spectrum& s_sigma, const Mat& rho) {
    const Real cut = kSupportCutoff * std::max(s_sigma.eigenvalues.maxCoeff(), Real(0));
    Real outside = 0;
    for (Eigen::Index i = 0; i < s_sigma.eigenvalues.size(); ++i) {
        if (s_sigma.eigenvalues[i] <= cut) {
            const Vec v = s_sigma.eigenvectors.col(i);
            outside += std::real((v.adjoint() * rho * v)(0, 0));
        }
    }
    return outside <= 1e-9;
}

}  // namespace detail

inline EntropyValue von_neumann_entropy(const Density& rho) {
    Spectrum s = spectral_decompose(rho.mat());
    Real h = 0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) h -= detail::xlogx(std::max(s.eigenvalues[i], Real(0)));
    return EntropyValue::finite(h);
}

/// Umegaki relative entropy in nats; +inf sentinel when supp(rho) is not inside supp(sigma).
inline EntropyValue relative_entropy(const Density& rho, const Density& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("relative_entropy: dimension mismatch");
    Spectrum ss = spectral_decompose(sigma.mat());
    if (!detail::support_contained(ss, rho.mat())) return EntropyValue::inf();
    Spectrum sr = spectral_decompose(rho.mat());
    Real d = 0;
    for (Eigen::Index i = 0; i < sr.eigenvalues.size(); ++i) d += detail::xlogx(std::max(sr.eigenvalues[i], Real(0)));
    const Real cut = kSupportCutoff * std::max(ss.eigenvalues.maxCoeff(), Real(0));
    for (Eigen::Index i = 0; i < ss.eigenvalues.size(); ++i) {
        if (ss.eigenvalues[i] <= cut) continue;
        const Vec v = ss.eigenvectors.col(i);
        const Real w = std::real((v.adjoint() * rho.mat() * v)(0, 0));
        d -= w * std::log(ss.eigenvalues[i]);
    }
    return EntropyValue::finite(d);
}

/// (ln lam - ln mu)/(lam - mu), the spectral kernel of the inverse-weighted norm.
inline Real divided_log_kernel(Real lam, Real mu) {
    if (lam <= 0 || mu <= 0) throw std::domain_error("divided_log_kernel: arguments must be positive");
    if (std::abs(lam - mu) < 1e-8 * std::max(lam, mu)) {
        // first-order series around coincidence; u <= 5e-9 so the u^2 term is noise
        const Real u = (lam - mu) / (lam + mu);
        return 2.0 / (lam + mu) * (1.0 + u * u / 3.0);
    }
    return (std::log(lam) - std::log(mu)) / (lam - mu);
}

/// ||X||^2 weighted by rho^{-1}: sum over support of |x~_ij|^2 k(lam_i, lam_j).
inline EntropyValue inv_weighted_norm_sq(const Mat& x, const Density& rho) {
    if (x.rows() != rho.dim() || x.cols() != rho.dim())
        throw std::invalid_argument("inv_weighted_norm_sq: dimension mismatch");
    Spectrum s = spectral_decompose(rho.mat());
    const Mat xt = s.eigenvectors.adjoint() * x * s.eigenvectors;
    const Real cut = kSupportCutoff * std::max(s.eigenvalues.maxCoeff(), Real(0));
    Real out = 0, outside = 0;
    for (Eigen::Index i = 0; i < xt.rows(); ++i)
        for (Eigen::Index j = 0; j < xt.cols(); ++j) {
            const Real a = std::norm(xt(i, j));
            if (a == 0) continue;
            if (s.eigenvalues[i] <= cut || s.eigenvalues[j] <= cut)
                outside += a;
            else
                out += a * divided_log_kernel(s.eigenvalues[i], s.eigenvalues[j]);
        }
    if (outside > 1e-18) return EntropyValue::inf();
    return EntropyValue::finite(out);
}

/// Gauss-Legendre nodes and weights on [0,1].
inline std::pair<std::vector<Real>, std::vector<Real>> gauss_legendre(int n) {
    std::vector<Real> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        Real t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            Real p0 = 1, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const Real dp = n * (t * p1 - p0) / (t * t - 1);
            const Real step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) {
                p0 = 1;
                p1 = t;
                for (int k = 2; k <= n; ++k) {
                    const Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const Real d2 = n * (t * p1 - p0) / (t * t - 1);
                x[n - 1 - i] = 0.5 * (t + 1);
                w[n - 1 - i] = 1.0 / ((1 - t * t) * d2 * d2);
                break;
            }
        }
    }
    return {x, w};
}

/// Double-integral representation of D(rho||sigma) over rho_t = (1-t)sigma + t rho,
/// evaluated on a tensorized Gauss-Legendre grid after the substitution t = s*u.
inline EntropyValue relative_entropy_double_integral(const Density& rho, const Density& sigma, int grid) {
    if (grid < 8) throw std::invalid_argument("relative_entropy_double_integral: grid must be >= 8");
    Spectrum ss = spectral_decompose(sigma.mat());
    if (!detail::support_contained(ss, rho.mat())) return EntropyValue::inf();
    const Mat diff = rho.mat() - sigma.mat();
    auto [xs, ws] = gauss_legendre(grid);
    Real total = 0;
    for (int a = 0; a < grid; ++a) {
        const Real s = xs[a];
        Real inner = 0;
        for (int b = 0; b < grid; ++b) {
            const Real t = s * xs[b];
            Mat rt = (1 - t) * sigma.mat() + t * rho.mat();
            EntropyValue f = inv_weighted_norm_sq(diff, Density((rt + rt.adjoint()) / 2.0));
            if (f.infinite) return EntropyValue::inf();
            inner += ws[b] * f.value;
        }
        total += ws[a] * s * inner;
    }
    return EntropyValue::finite(total);
}

/// (c-1)^2 / (c(ln c - 1) + 1), with the series limit 2 at c -> 1.
inline Real keylem_g(Real c) {
    if (c < 1) c = 1;
    const Real e = c - 1;
    if (std::abs(e) < 1e-4) return 1.0 / (0.5 - e / 6.0 + e * e / 12.0);
    return e * e / (c * (std::log(c) - 1) + 1);
}

struct KeylemSandwich {
    Real lower = 0;
    Real upper = 0;
    Real c = 1;
    bool infinite = false;
};

/// Two-sided bound lower <= D(rho||sigma) <= upper with c = lmax(sigma^{-1/2} rho sigma^{-1/2}).
inline KeylemSandwich keylem_sandwich(const Density& rho, const Density& sigma) {
    Spectrum ss = spectral_decompose(sigma.mat());
    if (!detail::support_contained(ss, rho.mat())) return {0, 0, 1, true};
    const Mat inv_sqrt = matrix_function_on_support(sigma.mat(), [](Real x) { return 1.0 / std::sqrt(x); });
    const Mat m = inv_sqrt * rho.mat() * inv_sqrt;
    const Real c = std::max(max_eigenvalue((m + m.adjoint()) / 2.0), Real(1));
    EntropyValue upper = inv_weighted_norm_sq(rho.mat() - sigma.mat(), sigma);
    if (upper.infinite) return {0, 0, c, true};
    return {upper.value / keylem_g(c), upper.value, c, false};
}

/// |D(rho||omega) - D(rho||E(rho)) - D(E(rho)||omega)|; requires E(omega) = omega.
template <class ApplyFn>
Real chain_rule_residual(const Density& rho, const Density& omega, const ApplyFn& e) {
    const Density eo = e(omega);
    if ((eo.mat() - omega.mat()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("chain_rule_residual: omega is not a fixed point of E");
    const Density er = e(rho);
    EntropyValue lhs = relative_entropy(rho, omega);
    EntropyValue t1 = relative_entropy(rho, er);
    EntropyValue t2 = relative_entropy(er, omega);
    if (lhs.infinite || t1.infinite || t2.infinite)
        return (lhs.infinite && (t1.infinite || t2.infinite)) ? 0.0 : std::numeric_limits<Real>::infinity();
    return std::abs(lhs.value - t1.value - t2.value);
}

/// D(rho||E(rho)) + D(rho||omega) - D(rho||E(omega)); expected >= -1e-8.
template <class ApplyFn>
Real subadd_gap(const Density& rho, const Density& omega, const ApplyFn& e) {
    EntropyValue t1 = relative_entropy(rho, e(rho));
    EntropyValue t2 = relative_entropy(rho, omega);
    EntropyValue t3 = relative_entropy(rho, e(omega));
    if (t1.infinite || t2.infinite) return std::numeric_limits<Real>::infinity();
    if (t3.infinite) return -std::numeric_limits<Real>::infinity();
    return t1.value + t2.value - t3.value;
}

/// H(AC) + H(BC) - H(ABC) - H(C) for a tripartite density with the given factor dims.
inline Real ssa_gap(const Density& rho, int da, int db, int dc) {
    const std::vector<int> dims{da, db, dc};
    const Mat rac = partial_trace(rho.mat(), dims, {1});
    const Mat rbc = partial_trace(rho.mat(), dims, {0});
    const Mat rc = partial_trace(rho.mat(), dims, {0, 1});
    const Real hac = von_neumann_entropy(Density(rac)).value;
    const Real hbc = von_neumann_entropy(Density(rbc)).value;
    const Real hc = von_neumann_entropy(Density(rc)).value;
    const Real habc = von_neumann_entropy(rho).value;
    return hac + hbc - habc - hc;
}

}  // namespace qfkit
