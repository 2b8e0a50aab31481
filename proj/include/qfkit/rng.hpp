#pragma once

#include "qfkit/core.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace qfkit {

/// Deterministic RNG: every stochastic operation threads an explicit 64-bit seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    Real uniform() {
        // 53-bit mantissa draw, stable across platforms
        return static_cast<Real>(gen_() >> 11) * 0x1.0p-53;
    }

    Real gaussian() {
        // Box-Muller; avoids implementation-defined std::normal_distribution
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        Real u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const Real r = std::sqrt(-2.0 * std::log(u1));
        const Real th = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    Cplx cgauss() { return {gaussian(), gaussian()}; }

    std::uint64_t raw() { return gen_(); }

    Mat ginibre(int rows, int cols) {
        Mat g(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) g(i, j) = cgauss();
        return g;
    }

    Mat haar_unitary(int d) {
        Mat g = ginibre(d, d);
        Eigen::HouseholderQR<Mat> qr(g);
        Mat q = qr.householderQ();
        Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < d; ++i) {
            Cplx rii = r(i, i);
            q.col(i) *= (std::abs(rii) > 0 ? rii / std::abs(rii) : Cplx(1, 0));
        }
        return q;
    }

    Vec pure_state(int d) {
        Vec v = ginibre(d, 1).col(0);
        return v / v.norm();
    }

    /// Dirichlet-flavored probability vector (normalized exponentials).
    std::vector<Real> prob_vector(int n) {
        std::vector<Real> p(n);
        Real s = 0;
        for (auto& x : p) {
            x = -std::log(std::max(uniform(), 1e-300));
            s += x;
        }
        for (auto& x : p) x /= s;
        return p;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    Real spare_ = 0;
};

enum class Ensemble { HilbertSchmidt, Pure, RankK, MajorizedPair };

inline Density random_density(int dim, Ensemble ensemble, std::uint64_t seed, int rank = 0) {
    if (dim < 1) throw std::invalid_argument("random_density: dim must be >= 1");
    Rng rng(seed);
    if (dim == 1) return Density(Mat::Ones(1, 1));
    switch (ensemble) {
        case Ensemble::Pure: {
            Vec v = rng.pure_state(dim);
            return Density(v * v.adjoint());
        }
        case Ensemble::RankK: {
            const int k = rank > 0 ? std::min(rank, dim) : std::max(1, dim / 2);
            Mat g = rng.ginibre(dim, k);
            Mat r = g * g.adjoint();
            return Density(r / r.trace().real());
        }
        case Ensemble::MajorizedPair:
            throw std::invalid_argument("random_density: use random_majorized_pair for pair output");
        case Ensemble::HilbertSchmidt:
        default: {
            Mat g = rng.ginibre(dim, dim);
            Mat r = g * g.adjoint();
            return Density(r / r.trace().real());
        }
    }
}

/// rho majorizes sigma by construction: sigma = sum_k p_k U_k rho U_k^dag.
inline std::pair<Density, Density> random_majorized_pair(int dim, std::uint64_t seed, int num_unitaries = 0) {
    if (dim < 1) throw std::invalid_argument("random_majorized_pair: dim must be >= 1");
    Rng rng(seed);
    if (dim == 1) return {Density(Mat::Ones(1, 1)), Density(Mat::Ones(1, 1))};
    Mat g = rng.ginibre(dim, dim);
    Mat r = g * g.adjoint();
    Density rho(r / r.trace().real());
    const int k = num_unitaries > 0 ? num_unitaries : dim + 1;
    std::vector<Real> w = (k == 1) ? std::vector<Real>{1.0} : rng.prob_vector(k);
    Mat s = Mat::Zero(dim, dim);
    for (int i = 0; i < k; ++i) {
        Mat u = rng.haar_unitary(dim);
        s += w[i] * u * rho.mat() * u.adjoint();
    }
    return {rho, Density((s + s.adjoint()) / 2.0)};
}

}  // namespace qfkit
