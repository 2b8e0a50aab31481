#pragma once

#include "qfkit/core.hpp"
#include "qfkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qfkit {

// Vectorization is row-major throughout: vec(A rho B) = (A kron B^T) vec(rho),
// so ad_U has superoperator U kron conj(U).

inline Vec vec_rm(const Mat& m) {
    Vec v(m.rows() * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
    return v;
}

inline Mat unvec_rm(const Vec& v, int d) {
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = v[i * d + j];
    return m;
}

inline Vec bell_vector(int d) {
    Vec v = Vec::Zero(d * d);
    for (int i = 0; i < d; ++i) v[i * d + i] = 1.0 / std::sqrt(Real(d));
    return v;
}

inline Mat superop_to_choi(const Mat& s, int d) {
    Mat j(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            for (int jj = 0; jj < d; ++jj)
                for (int l = 0; l < d; ++l) j(i * d + k, jj * d + l) = s(i * d + jj, k * d + l) / Real(d);
    return j;
}

inline Mat choi_to_superop(const Mat& j, int d) {
    Mat s(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int jj = 0; jj < d; ++jj)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) s(i * d + jj, k * d + l) = j(i * d + k, jj * d + l) * Real(d);
    return s;
}

/// Block decomposition of a subalgebra: within each diagonal block (after the
/// basis change) the retained factor has dimension a and the traced one b.
struct Block {
    int a = 1;
    int b = 1;
    Mat weight;  // b x b density for weighted expectations; empty otherwise
};

struct SubalgebraBlocks {
    Mat basis_change;  // empty means identity
    std::vector<Block> blocks;

    int dim() const {
        int d = 0;
        for (const auto& bl : blocks) d += bl.a * bl.b;
        return d;
    }
    bool has_weights() const {
        return !blocks.empty() && blocks.front().weight.size() > 0;
    }
    void validate() const {
        if (blocks.empty()) throw std::invalid_argument("SubalgebraBlocks: no blocks");
        for (const auto& bl : blocks) {
            if (bl.a < 1 || bl.b < 1) throw std::invalid_argument("SubalgebraBlocks: nonpositive factor dim");
            if (bl.weight.size() > 0) {
                if (bl.weight.rows() != bl.b) throw std::invalid_argument("SubalgebraBlocks: weight dim mismatch");
                Density check(bl.weight);  // enforces density invariants
                (void)check;
            }
        }
        if (basis_change.size() > 0) {
            if (basis_change.rows() != dim()) throw std::invalid_argument("SubalgebraBlocks: basis dim mismatch");
            if (!is_unitary(basis_change)) throw std::invalid_argument("SubalgebraBlocks: basis not unitary");
        }
    }
    Mat basis_or_identity() const {
        return basis_change.size() > 0 ? basis_change : Mat(Mat::Identity(dim(), dim()));
    }

    static SubalgebraBlocks scalar(int d) { return {{}, {Block{1, d, {}}}}; }
    static SubalgebraBlocks pinching(int d) {
        SubalgebraBlocks sb;
        sb.blocks.assign(d, Block{1, 1, {}});
        return sb;
    }
    static SubalgebraBlocks factor(int a, int b) { return {{}, {Block{a, b, {}}}}; }
};

/// A channel as a Kraus list, Choi matrix (trace-1 convention), or weighted
/// unitary mixture. Conversions between the forms are exact.
class ChannelRep {
public:
    enum class Form { Kraus, Choi, Mixture };

    static ChannelRep from_kraus(std::vector<Mat> ks) {
        if (ks.empty()) throw std::invalid_argument("ChannelRep: empty Kraus list");
        const int d = static_cast<int>(ks.front().rows());
        Mat comp = Mat::Zero(d, d);
        for (const Mat& k : ks) {
            if (k.rows() != d || k.cols() != d) throw std::invalid_argument("ChannelRep: Kraus dims differ");
            comp += k.adjoint() * k;
        }
        if ((comp - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("ChannelRep: Kraus completeness violated beyond 1e-10");
        ChannelRep ch;
        ch.form_ = Form::Kraus;
        ch.dim_ = d;
        ch.kraus_ = std::move(ks);
        return ch;
    }

    static ChannelRep from_choi(Mat j) {
        const int dd = static_cast<int>(j.rows());
        const int d = static_cast<int>(std::lround(std::sqrt(Real(dd))));
        if (d * d != dd) throw std::invalid_argument("ChannelRep: Choi dimension is not a square");
        require_hermitian(j, "Choi matrix");
        if (std::abs(j.trace().real() - 1.0) > 1e-10)
            throw std::invalid_argument("ChannelRep: Choi trace differs from 1");
        if (min_eigenvalue(j) < -1e-10) throw std::invalid_argument("ChannelRep: Choi not PSD");
        ChannelRep ch;
        ch.form_ = Form::Choi;
        ch.dim_ = d;
        ch.choi_ = std::move(j);
        return ch;
    }

    static ChannelRep from_mixture(std::vector<std::pair<Real, Mat>> mix) {
        if (mix.empty()) throw std::invalid_argument("ChannelRep: empty mixture");
        Real s = 0;
        const int d = static_cast<int>(mix.front().second.rows());
        for (const auto& [p, u] : mix) {
            if (p < -1e-12) throw std::invalid_argument("ChannelRep: negative mixture weight");
            if (!is_unitary(u)) throw std::invalid_argument("ChannelRep: mixture element not unitary");
            if (u.rows() != d) throw std::invalid_argument("ChannelRep: mixture dims differ");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("ChannelRep: mixture weights do not sum to 1 within 1e-12");
        ChannelRep ch;
        ch.form_ = Form::Mixture;
        ch.dim_ = d;
        ch.mixture_ = std::move(mix);
        return ch;
    }

    Form form() const { return form_; }
    int dim() const { return dim_; }
    const std::vector<std::pair<Real, Mat>>& mixture() const { return mixture_; }

    Mat apply(const Mat& x) const {
        switch (form_) {
            case Form::Kraus: {
                Mat out = Mat::Zero(dim_, dim_);
                for (const Mat& k : kraus_) out += k * x * k.adjoint();
                return out;
            }
            case Form::Mixture: {
                Mat out = Mat::Zero(dim_, dim_);
                for (const auto& [p, u] : mixture_) out += p * (u * x * u.adjoint());
                return out;
            }
            case Form::Choi:
            default: {
                Mat out = Mat::Zero(dim_, dim_);
                for (int i = 0; i < dim_; ++i)
                    for (int j = 0; j < dim_; ++j) {
                        Cplx acc = 0;
                        for (int k = 0; k < dim_; ++k)
                            for (int l = 0; l < dim_; ++l) acc += choi_(i * dim_ + k, j * dim_ + l) * x(k, l);
                        out(i, j) = Real(dim_) * acc;
                    }
                return out;
            }
        }
    }

    Density operator()(const Density& rho) const {
        if (rho.dim() != dim_) throw std::invalid_argument("ChannelRep: input dimension mismatch");
        Mat out = apply(rho.mat());
        return Density((out + out.adjoint()) / 2.0);
    }

    Mat choi() const {
        if (form_ == Form::Choi) return choi_;
        Mat j = Mat::Zero(dim_ * dim_, dim_ * dim_);
        if (form_ == Form::Kraus) {
            for (const Mat& k : kraus_) {
                Vec w = vec_rm(k) / std::sqrt(Real(dim_));
                j += w * w.adjoint();
            }
        } else {
            for (const auto& [p, u] : mixture_) {
                Vec w = vec_rm(u) / std::sqrt(Real(dim_));
                j += p * (w * w.adjoint());
            }
        }
        return j;
    }

    Mat superop() const {
        switch (form_) {
            case Form::Kraus: {
                Mat s = Mat::Zero(dim_ * dim_, dim_ * dim_);
                for (const Mat& k : kraus_) s += kron(k, k.conjugate());
                return s;
            }
            case Form::Mixture: {
                Mat s = Mat::Zero(dim_ * dim_, dim_ * dim_);
                for (const auto& [p, u] : mixture_) s += p * kron(u, u.conjugate());
                return s;
            }
            case Form::Choi:
            default:
                return choi_to_superop(choi_, dim_);
        }
    }

    std::vector<Mat> kraus_ops() const {
        if (form_ == Form::Kraus) return kraus_;
        Spectrum s = spectral_decompose(choi());
        std::vector<Mat> ks;
        const Real cut = 1e-12 * std::max(s.eigenvalues.maxCoeff(), Real(0));
        for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
            if (s.eigenvalues[i] <= cut) continue;
            ks.push_back(std::sqrt(s.eigenvalues[i] * dim_) * unvec_rm(s.eigenvectors.col(i), dim_));
        }
        return ks;
    }

    bool is_idempotent(Real tol = 1e-9) const {
        Mat s = superop();
        return (s * s - s).cwiseAbs().maxCoeff() <= tol;
    }

    bool is_unital(Real tol = 1e-8) const {
        return (apply(Mat::Identity(dim_, dim_)) - Mat::Identity(dim_, dim_)).cwiseAbs().maxCoeff() <= tol;
    }

private:
    Form form_ = Form::Kraus;
    int dim_ = 0;
    std::vector<Mat> kraus_;
    Mat choi_;
    std::vector<std::pair<Real, Mat>> mixture_;
};

inline Density apply_channel(const ChannelRep& ch, const Density& rho) { return ch(rho); }

inline Mat choi_matrix(const ChannelRep& ch) { return ch.choi(); }

inline ChannelRep identity_channel(int d) {
    return ChannelRep::from_mixture({{1.0, Mat::Identity(d, d)}});
}

/// Conditional expectation that deletes off-diagonal entries in the given basis.
inline ChannelRep pinching_expectation(const Mat& basis) {
    if (!is_unitary(basis)) throw std::invalid_argument("pinching_expectation: basis not unitary");
    const int d = static_cast<int>(basis.rows());
    std::vector<Mat> ks;
    ks.reserve(d);
    for (int i = 0; i < d; ++i) {
        Vec v = basis.col(i);
        ks.push_back(v * v.adjoint());
    }
    return ChannelRep::from_kraus(std::move(ks));
}

/// Doubly stochastic expectation onto oplus_l (M_{a_l} (x) 1/b_l).
inline ChannelRep block_expectation(const SubalgebraBlocks& sb) {
    sb.validate();
    if (sb.has_weights()) throw std::invalid_argument("block_expectation: weights present, use weighted_expectation");
    const int d = sb.dim();
    const Mat w = sb.basis_or_identity();
    std::vector<Mat> ks;
    int off = 0;
    for (const auto& bl : sb.blocks) {
        for (int i = 0; i < bl.b; ++i)
            for (int j = 0; j < bl.b; ++j) {
                Mat k = Mat::Zero(d, d);
                for (int x = 0; x < bl.a; ++x) k(off + x * bl.b + i, off + x * bl.b + j) = 1.0 / std::sqrt(Real(bl.b));
                ks.push_back(w * k * w.adjoint());
            }
        off += bl.a * bl.b;
    }
    return ChannelRep::from_kraus(std::move(ks));
}

/// Weighted expectation onto oplus_l (rho^{A_l} (x) sigma_l).
inline ChannelRep weighted_expectation(const SubalgebraBlocks& sb) {
    sb.validate();
    if (!sb.has_weights()) throw std::invalid_argument("weighted_expectation: missing block weights");
    for (const auto& bl : sb.blocks)
        if (bl.weight.size() == 0) throw std::invalid_argument("weighted_expectation: missing block weights");
    const int d = sb.dim();
    const Mat w = sb.basis_or_identity();
    std::vector<Mat> ks;
    int off = 0;
    for (const auto& bl : sb.blocks) {
        const Mat sqw = matrix_function_on_support(bl.weight, [](Real x) { return std::sqrt(x); });
        for (int i = 0; i < bl.b; ++i)
            for (int j = 0; j < bl.b; ++j) {
                // K = I_a (x) sqrt(sigma)|i><j| within the block
                Mat k = Mat::Zero(d, d);
                for (int x = 0; x < bl.a; ++x)
                    for (int y = 0; y < bl.b; ++y) k(off + x * bl.b + y, off + x * bl.b + j) = sqw(y, i);
                ks.push_back(w * k * w.adjoint());
            }
        off += bl.a * bl.b;
    }
    return ChannelRep::from_kraus(std::move(ks));
}

/// Uniform average of ad_u over a finite set checked for closure (up to a
/// global phase, so projective representations qualify) and inverses.
inline ChannelRep group_average_expectation(const std::vector<Mat>& us) {
    if (us.empty()) throw std::invalid_argument("group_average_expectation: empty set");
    const int d = static_cast<int>(us.front().rows());
    for (const Mat& u : us)
        if (!is_unitary(u) || u.rows() != d)
            throw std::invalid_argument("group_average_expectation: elements must be unitary, same dim");
    auto contains_up_to_phase = [&](const Mat& p) {
        for (const Mat& u : us)
            if (std::abs(std::abs((u.adjoint() * p).trace()) - Real(d)) <= 1e-10 * d) return true;
        return false;
    };
    for (size_t i = 0; i < us.size(); ++i)
        for (size_t j = 0; j < us.size(); ++j)
            if (!contains_up_to_phase(us[i] * us[j]))
                throw std::invalid_argument("group_average_expectation: set not closed under product of elements " +
                                            std::to_string(i) + " and " + std::to_string(j));
    for (size_t i = 0; i < us.size(); ++i)
        if (!contains_up_to_phase(us[i].adjoint()))
            throw std::invalid_argument("group_average_expectation: inverse of element " + std::to_string(i) +
                                        " missing");
    std::vector<std::pair<Real, Mat>> mix;
    mix.reserve(us.size());
    for (const Mat& u : us) mix.emplace_back(1.0 / us.size(), u);
    return ChannelRep::from_mixture(std::move(mix));
}

/// compose(a, b) applies b first: (a o b)(rho) = a(b(rho)).
inline ChannelRep compose(const ChannelRep& a, const ChannelRep& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("compose: dimension mismatch");
    Mat s = a.superop() * b.superop();
    Mat j = superop_to_choi(s, a.dim());
    return ChannelRep::from_choi((j + j.adjoint()) / 2.0);
}

inline ChannelRep convex_combine(const std::vector<std::pair<Real, ChannelRep>>& parts) {
    if (parts.empty()) throw std::invalid_argument("convex_combine: empty list");
    Real s = 0;
    for (const auto& [p, ch] : parts) s += p;
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("convex_combine: weights do not sum to 1 within 1e-12");
    const int d = parts.front().second.dim();
    Mat j = Mat::Zero(d * d, d * d);
    for (const auto& [p, ch] : parts) {
        if (ch.dim() != d) throw std::invalid_argument("convex_combine: dimension mismatch");
        if (p < 0) throw std::invalid_argument("convex_combine: negative weight");
        j += p * ch.choi();
    }
    return ChannelRep::from_choi((j + j.adjoint()) / 2.0);
}

/// (ch (x) id_b) acting on a composite system of dimension dim*b.
inline ChannelRep tensor_with_identity(const ChannelRep& ch, int b) {
    std::vector<Mat> ks;
    const Mat ib = Mat::Identity(b, b);
    for (const Mat& k : ch.kraus_ops()) ks.push_back(kron(k, ib));
    return ChannelRep::from_kraus(std::move(ks));
}

/// Expectation onto the intersection algebra: average the inputs and square the
/// superoperator to convergence, then symmetrize.
inline ChannelRep intersection_expectation(const std::vector<ChannelRep>& es) {
    if (es.empty()) throw std::invalid_argument("intersection_expectation: empty input");
    const int d = es.front().dim();
    for (const auto& e : es) {
        if (e.dim() != d) throw std::invalid_argument("intersection_expectation: dimension mismatch");
        if (!e.is_idempotent(1e-9)) throw std::invalid_argument("intersection_expectation: input not idempotent");
    }
    if (es.size() == 1) return es.front();
    Mat s = Mat::Zero(d * d, d * d);
    for (const auto& e : es) s += e.superop();
    s /= Real(es.size());
    int steps = 0;
    for (;;) {
        Mat s2 = s * s;
        const Real resid = (s2 - s).norm();
        s = std::move(s2);
        if (resid < 1e-10) break;
        if (++steps > 10000)
            throw std::runtime_error("intersection_expectation: power iteration failed to converge, residual " +
                                     std::to_string(resid));
    }
    s = (s + s.adjoint()).eval() / 2.0;
    Mat j = superop_to_choi(s, d);
    return ChannelRep::from_choi((j + j.adjoint()) / 2.0);
}

/// Operator norm of the superoperator commutator, and the commuting-square test.
inline std::pair<Real, bool> commuting_square_gap(const ChannelRep& e1, const ChannelRep& e2) {
    if (e1.dim() != e2.dim()) throw std::invalid_argument("commuting_square_gap: dimension mismatch");
    Mat s1 = e1.superop(), s2 = e2.superop();
    Mat comm = s1 * s2 - s2 * s1;
    Eigen::JacobiSVD<Mat> svd(comm);
    const Real gap = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    bool commuting = false;
    if (gap < 1e-9) {
        ChannelRep inter = intersection_expectation({e1, e2});
        commuting = ((s1 * s2) - inter.superop()).cwiseAbs().maxCoeff() <= 1e-8;
    }
    return {gap, commuting};
}

struct ExpectationWeight {
    Real w_star = 0;
    Real zeta_star = 1;
    bool support_obstruction = false;
};

/// Largest w with Choi(psi) - w Choi(e) PSD; zeta_star = 1 - w_star.
inline ExpectationWeight max_expectation_weight(const ChannelRep& psi, const ChannelRep& e) {
    if (psi.dim() != e.dim()) throw std::invalid_argument("max_expectation_weight: dimension mismatch");
    if (!e.is_idempotent(1e-9)) throw std::invalid_argument("max_expectation_weight: e not idempotent");
    Mat sp = psi.superop(), se = e.superop();
    if ((sp * se - se).cwiseAbs().maxCoeff() > 1e-8 || (se * sp - se).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("max_expectation_weight: psi does not fix e's algebra (psi e = e psi = e)");
    const Mat jp = psi.choi(), je = e.choi();
    Spectrum s = spectral_decompose(jp);
    const Real cut = 1e-12 * std::max(s.eigenvalues.maxCoeff(), Real(0));
    std::vector<Eigen::Index> keep, null;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        (s.eigenvalues[i] > cut ? keep : null).push_back(i);
    if (!null.empty()) {
        Mat vn(je.rows(), null.size());
        for (size_t i = 0; i < null.size(); ++i) vn.col(i) = s.eigenvectors.col(null[i]);
        if ((vn.adjoint() * je * vn).cwiseAbs().maxCoeff() > 1e-10) return {0.0, 1.0, true};
    }
    Mat vk(je.rows(), keep.size());
    RVec inv_sqrt(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
        vk.col(i) = s.eigenvectors.col(keep[i]);
        inv_sqrt[i] = 1.0 / std::sqrt(s.eigenvalues[keep[i]]);
    }
    Mat m = inv_sqrt.asDiagonal() * (vk.adjoint() * je * vk) * inv_sqrt.asDiagonal();
    const Real lmax = max_eigenvalue((m + m.adjoint()) / 2.0);
    Real w = lmax > 0 ? 1.0 / lmax : 1.0;
    // PSD re-check of the residual at w_star, bisecting down if roundoff bites
    for (int it = 0; it < 20 && min_eigenvalue(jp - w * je) < -1e-10; ++it) w *= 1.0 - 1e-12 * (1 << it);
    w = std::min(w, 1.0);
    return {w, 1.0 - w, false};
}

namespace detail {

inline Real op_norm_hermitian(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline Mat support_restricted(const Mat& a, const Mat& b) {
    // b^{-1/2} a b^{-1/2} on the support of b
    Spectrum s = spectral_decompose(b);
    const Real cut = 1e-12 * std::max(s.eigenvalues.maxCoeff(), Real(0));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        if (s.eigenvalues[i] > cut) keep.push_back(i);
    Mat v(b.rows(), keep.size());
    RVec is(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
        v.col(i) = s.eigenvectors.col(keep[i]);
        is[i] = 1.0 / std::sqrt(s.eigenvalues[keep[i]]);
    }
    Mat m = is.asDiagonal() * (v.adjoint() * a * v) * is.asDiagonal();
    return (m + m.adjoint()) / 2.0;
}

}  // namespace detail

/// Smallest c with a <= c b on the support of b (generalized eigenvalue pencil).
inline Real loewner_pencil_max(const Mat& a, const Mat& b) {
    return max_eigenvalue(detail::support_restricted(a, b));
}

/// Largest kappa with kappa b <= a on the support of b.
inline Real loewner_pencil_min(const Mat& a, const Mat& b) {
    return min_eigenvalue(detail::support_restricted(a, b));
}

/// Sufficient zeta from the Bell-state bound: d * max_l(b_l/a_l) * ||(Phi (x) id)(Omega) - (E (x) id)(Omega)||_inf.
inline Real near_zeta_sufficient(const ChannelRep& phi, const ChannelRep& e, const SubalgebraBlocks& blocks) {
    blocks.validate();
    const int d = phi.dim();
    if (e.dim() != d || blocks.dim() != d) throw std::invalid_argument("near_zeta_sufficient: dimension mismatch");
    if (!phi.is_unital()) throw std::invalid_argument("near_zeta_sufficient: phi must be unital");
    Mat sp = phi.superop(), se = e.superop();
    if ((sp * se - se).cwiseAbs().maxCoeff() > 1e-8 || (se * sp - se).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("near_zeta_sufficient: phi does not fix e's algebra");
    const Vec omega = bell_vector(d);
    const Mat bell = omega * omega.adjoint();
    Mat diff = Mat::Zero(d * d, d * d);
    {
        ChannelRep pe = tensor_with_identity(phi, d);
        ChannelRep ee = tensor_with_identity(e, d);
        diff = pe.apply(bell) - ee.apply(bell);
    }
    const Real dist = detail::op_norm_hermitian((diff + diff.adjoint()) / 2.0);
    Real factor = 0;
    for (const auto& bl : blocks.blocks) factor = std::max(factor, Real(bl.b) / Real(bl.a));
    return std::clamp(Real(d) * factor * dist, Real(0), Real(1));
}

/// Scalar-algebra diagnostic: d * sup over a sampled net of pure states of
/// ||phi(eta) - 1/d||_inf, with local refinement of the best sample.
inline Real near_zeta_scalar_sampled(const ChannelRep& phi, int samples, std::uint64_t seed) {
    const int d = phi.dim();
    Rng rng(seed);
    const Mat mixed = Mat::Identity(d, d) / Real(d);
    auto obj = [&](const Vec& v) {
        Mat out = phi.apply(v * v.adjoint());
        return detail::op_norm_hermitian((out + out.adjoint()) / 2.0 - mixed);
    };
    Vec best = rng.pure_state(d);
    Real best_val = obj(best);
    for (int i = 1; i < samples; ++i) {
        Vec v = rng.pure_state(d);
        const Real f = obj(v);
        if (f > best_val) {
            best_val = f;
            best = v;
        }
    }
    Real step = 0.3;
    for (int i = 0; i < 100; ++i) {
        Vec v = best + step * rng.ginibre(d, 1).col(0);
        v /= v.norm();
        const Real f = obj(v);
        if (f > best_val) {
            best_val = f;
            best = v;
            step *= 1.2;
        } else {
            step *= 0.7;
        }
    }
    return std::clamp(Real(d) * best_val, Real(0), Real(1));
}

struct IndexEstimate {
    Real lower_bound = 1;
    long samples = 0;
    bool extended = false;
};

/// One may scale the index by (1/d)/min-eig(sigma) for weighted expectations.
inline Real scaled_index_bound(const IndexEstimate& est, int d, Real min_eig_sigma) {
    if (min_eig_sigma <= 0) throw std::invalid_argument("scaled_index_bound: nonpositive minimal eigenvalue");
    return est.lower_bound / (Real(d) * min_eig_sigma);
}

/// Sampled lower bound on the subalgebra index C (C_cb when extended): maximum
/// over pure states of lmax(E(psi)^{-1/2} psi E(psi)^{-1/2}) on the support,
/// refined by 100 steps of random-direction hill climbing from the best sample.
inline IndexEstimate index_estimate(const ChannelRep& e, int dim, long samples, bool extended,
                                    std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("index_estimate: samples must be >= 1");
    if (e.dim() != dim) throw std::invalid_argument("index_estimate: dimension mismatch");
    if (!e.is_idempotent(1e-9)) throw std::invalid_argument("index_estimate: e not idempotent");
    const int D = extended ? dim * dim : dim;
    const ChannelRep eext = extended ? tensor_with_identity(e, dim) : e;
    Rng rng(seed);
    auto objective = [&](const Vec& v) {
        const Mat psi = v * v.adjoint();
        Mat ep = eext.apply(psi);
        ep = (ep + ep.adjoint()) / 2.0;
        const Mat inv_sqrt = matrix_function_on_support(ep, [](Real x) { return 1.0 / std::sqrt(x); });
        const Mat supp = support_projector(ep);
        // restrict psi to the support so mass outside contributes nothing
        const Mat m = inv_sqrt * (supp * psi * supp) * inv_sqrt;
        return max_eigenvalue((m + m.adjoint()) / 2.0);
    };
    Vec best = rng.pure_state(D);
    Real best_val = objective(best);
    for (long i = 1; i < samples; ++i) {
        Vec v = rng.pure_state(D);
        const Real f = objective(v);
        if (f > best_val) {
            best_val = f;
            best = v;
        }
    }
    Real step = 0.25;
    for (int i = 0; i < 100; ++i) {
        Vec v = best + step * rng.ginibre(D, 1).col(0);
        v /= v.norm();
        const Real f = objective(v);
        if (f > best_val) {
            best_val = f;
            best = v;
            step *= 1.2;
        } else {
            step *= 0.7;
        }
    }
    return {std::max(best_val, Real(1)), samples, extended};
}

/// Certified complete index bound <Omega| Choi(e)^+ |Omega>: the smallest c
/// with c Choi(e) >= Choi(id), valid for all extensions.
inline Real complete_index_bound(const ChannelRep& e) {
    const int d = e.dim();
    const Mat je = e.choi();
    Spectrum s = spectral_decompose(je);
    const Vec omega = bell_vector(d);
    const Real cut = 1e-12 * std::max(s.eigenvalues.maxCoeff(), Real(0));
    Real out = 0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        if (s.eigenvalues[i] <= cut) continue;
        out += std::norm(s.eigenvectors.col(i).dot(omega)) / s.eigenvalues[i];
    }
    return out;
}

}  // namespace qfkit
