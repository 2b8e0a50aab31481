#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfkit {

using Real = double;
using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr Real kHermTol = 1e-12;
inline constexpr Real kDensityTol = 1e-10;
inline constexpr Real kSupportCutoff = 1e-10;  // relative to largest eigenvalue

inline bool is_hermitian(const Mat& m, Real tol = kHermTol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline void require_hermitian(const Mat& m, const char* what = "operator") {
    if (!is_hermitian(m))
        throw std::invalid_argument(std::string(what) + " is not Hermitian within 1e-12");
}

inline bool is_unitary(const Mat& u, Real tol = 1e-10) {
    if (u.rows() != u.cols()) return false;
    Mat d = u.adjoint() * u - Mat::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff() <= tol;
}

/// Eigenvalues sorted non-increasing, eigenvector columns matching.
struct Spectrum {
    RVec eigenvalues;
    Mat eigenvectors;
};

inline Spectrum spectral_decompose(const Mat& h) {
    require_hermitian(h, "spectral_decompose input");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed to converge");
    const auto n = h.rows();
    Spectrum s;
    s.eigenvalues = es.eigenvalues().reverse();
    s.eigenvectors = Mat(n, n);
    for (Eigen::Index i = 0; i < n; ++i) s.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
    return s;
}

inline Real min_eigenvalue(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline Real max_eigenvalue(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// f applied to eigenvalues above the relative support cutoff; below-cutoff
/// eigenvalues map to 0 regardless of f.
inline Mat matrix_function_on_support(const Mat& h, const std::function<Real(Real)>& f) {
    Spectrum s = spectral_decompose(h);
    const Real amax = s.eigenvalues.cwiseAbs().maxCoeff();
    const Real cut = kSupportCutoff * amax;
    RVec mapped(s.eigenvalues.size());
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        const Real lam = s.eigenvalues[i];
        if (amax == 0.0 || std::abs(lam) < cut) {
            mapped[i] = 0.0;
        } else {
            const Real v = f(lam);
            if (!std::isfinite(v))
                throw std::domain_error("matrix function evaluated outside its domain at eigenvalue " +
                                        std::to_string(lam));
            mapped[i] = v;
        }
    }
    return s.eigenvectors * mapped.asDiagonal() * s.eigenvectors.adjoint();
}

/// a <= b in the Loewner order up to tol.
inline bool loewner_leq(const Mat& a, const Mat& b, Real tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("loewner_leq: dimension mismatch");
    return min_eigenvalue(b - a) >= -tol;
}

/// Positive semidefinite matrix of unit trace. Validated on construction.
class Density {
public:
    explicit Density(Mat m) : m_(std::move(m)) {
        require_hermitian(m_, "density");
        if (std::abs(m_.trace().real() - 1.0) > kDensityTol || std::abs(m_.trace().imag()) > kDensityTol)
            throw std::invalid_argument("density trace differs from 1 beyond 1e-10");
        if (min_eigenvalue(m_) < -kDensityTol)
            throw std::invalid_argument("density has eigenvalue below -1e-10");
    }
    const Mat& mat() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

private:
    Mat m_;
};

inline Density maximally_mixed(int d) { return Density(Mat::Identity(d, d) / Real(d)); }

// Kronecker product, first factor major: (A(x)B)[(i1*rB+i2),(j1*cB+j2)] = A(i1,j1) B(i2,j2).
inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Trace out the subsystems listed in `traced` (0-based positions into `dims`).
inline Mat partial_trace(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& traced) {
    int total = 1;
    for (int d : dims) total *= d;
    if (rho.rows() != total || rho.cols() != total)
        throw std::invalid_argument("partial_trace: dims do not match matrix size");
    std::vector<bool> is_traced(dims.size(), false);
    for (int t : traced) {
        if (t < 0 || t >= static_cast<int>(dims.size()))
            throw std::invalid_argument("partial_trace: subsystem index out of range");
        is_traced[t] = true;
    }
    int dkeep = 1, dtrace = 1;
    for (size_t k = 0; k < dims.size(); ++k) (is_traced[k] ? dtrace : dkeep) *= dims[k];
    Mat out = Mat::Zero(dkeep, dkeep);

    const int nsys = static_cast<int>(dims.size());
    std::vector<int> idx(nsys, 0), jdx(nsys, 0);
    auto flat = [&](const std::vector<int>& v) {
        int f = 0;
        for (int k = 0; k < nsys; ++k) f = f * dims[k] + v[k];
        return f;
    };
    auto keep_flat = [&](const std::vector<int>& v) {
        int f = 0;
        for (int k = 0; k < nsys; ++k)
            if (!is_traced[k]) f = f * dims[k] + v[k];
        return f;
    };
    // iterate over all (row, col) multi-indices that agree on traced subsystems
    std::function<void(int)> rec = [&](int k) {
        if (k == nsys) {
            out(keep_flat(idx), keep_flat(jdx)) += rho(flat(idx), flat(jdx));
            return;
        }
        if (is_traced[k]) {
            for (int v = 0; v < dims[k]; ++v) {
                idx[k] = jdx[k] = v;
                rec(k + 1);
            }
        } else {
            for (int v = 0; v < dims[k]; ++v)
                for (int w = 0; w < dims[k]; ++w) {
                    idx[k] = v;
                    jdx[k] = w;
                    rec(k + 1);
                }
        }
    };
    rec(0);
    return out;
}

/// Projector onto the numerical support of a PSD operator.
inline Mat support_projector(const Mat& h) {
    Spectrum s = spectral_decompose(h);
    const Real cut = kSupportCutoff * std::max(s.eigenvalues.cwiseAbs().maxCoeff(), Real(0));
    Mat p = Mat::Zero(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        if (s.eigenvalues[i] > cut) p += s.eigenvectors.col(i) * s.eigenvectors.col(i).adjoint();
    return p;
}

}  // namespace qfkit
