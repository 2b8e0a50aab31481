#pragma once

#include "qfkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace qfkit {

/// Nonnegative entries summing to 1, stored non-increasing.
class ProbVector {
public:
    explicit ProbVector(std::vector<Real> entries) : e_(std::move(entries)) {
        Real s = 0;
        for (Real x : e_) {
            if (x < -1e-12) throw std::invalid_argument("ProbVector: negative entry");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("ProbVector: entries do not sum to 1");
        std::sort(e_.begin(), e_.end(), std::greater<Real>());
    }
    const std::vector<Real>& entries() const { return e_; }
    size_t size() const { return e_.size(); }
    Real operator[](size_t i) const { return e_[i]; }

private:
    std::vector<Real> e_;
};

struct Move {
    int from;
    int to;
    Real delta;
};
using MoveList = std::vector<Move>;

inline bool majorizes(const ProbVector& p, const ProbVector& q, Real tol = 1e-12) {
    if (p.size() != q.size()) throw std::invalid_argument("majorizes: length mismatch");
    Real sp = 0, sq = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        sp += p[i];
        sq += q[i];
        if (sp < sq - tol) return false;
    }
    return true;
}

inline ProbVector prob_from_eigenvalues(const RVec& v) {
    std::vector<Real> e(v.data(), v.data() + v.size());
    for (Real& x : e) x = std::max(x, Real(0));
    Real s = std::accumulate(e.begin(), e.end(), Real(0));
    for (Real& x : e) x /= s;
    return ProbVector(e);
}

/// Cascading probability redistribution, steps (1)-(3) of the proof procedure.
/// Indices are 0-based; every move goes from a smaller to a larger index.
inline MoveList cascade_redistribute(const ProbVector& src, const ProbVector& dst) {
    if (!majorizes(src, dst)) throw std::invalid_argument("cascade_redistribute: src does not majorize dst");
    const int n = static_cast<int>(src.size());
    std::vector<Real> omega = src.entries();
    MoveList moves;
    for (int i = 0; i < n; ++i) {
        Real surplus = omega[i] - dst[i];
        if (surplus <= 0) continue;
        omega[i] = dst[i];
        // scan j strictly increasing, exactly as the procedure enumerates
        for (int j = i + 1; j < n && surplus > 1e-15; ++j) {
            const Real deficit = dst[j] - omega[j];
            if (deficit <= 0) continue;
            const Real delta = std::min(surplus, deficit);
            omega[j] += delta;
            surplus -= delta;
            moves.push_back({i, j, delta});
        }
    }
    return moves;
}

/// Replay moves with compensated (Kahan) accumulation.
inline std::vector<Real> replay_moves(const ProbVector& src, const MoveList& moves) {
    std::vector<Real> v = src.entries();
    std::vector<Real> comp(v.size(), 0.0);
    auto add = [&](int i, Real x) {
        const Real y = x - comp[i];
        const Real t = v[i] + y;
        comp[i] = (t - v[i]) - y;
        v[i] = t;
    };
    for (const Move& m : moves) {
        add(m.from, -m.delta);
        add(m.to, m.delta);
    }
    return v;
}

inline Real classical_rel_entropy(const std::vector<Real>& p, const std::vector<Real>& q) {
    Real d = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) return std::numeric_limits<Real>::infinity();
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

/// D(rho||omega~) - D(rho||omega) for the single flattening move omega_i -= delta,
/// omega_j += delta. Hypotheses of the flattening lemma are checked.
inline Real flatten_step_delta(const ProbVector& rho, const std::vector<Real>& omega, int i, int j,
                               Real delta) {
    const int n = static_cast<int>(rho.size());
    if (i < 0 || j < 0 || i >= n || j >= n || i == j || static_cast<int>(omega.size()) != n)
        throw std::invalid_argument("flatten_step_delta: bad indices");
    if (delta < 0) throw std::invalid_argument("flatten_step_delta: delta must be >= 0");
    if (rho[i] < rho[j] - 1e-15) throw std::invalid_argument("flatten_step_delta: requires rho_i >= rho_j");
    if (rho[i] * omega[j] < rho[j] * omega[i] - 1e-15)
        throw std::invalid_argument("flatten_step_delta: requires rho_i*omega_j >= rho_j*omega_i");
    if (delta > omega[i] + 1e-15) throw std::invalid_argument("flatten_step_delta: delta exceeds omega_i");
    if (delta == 0) return 0.0;
    // D(rho||omega~) - D(rho||omega) = rho_i ln(w_i/(w_i-d)) + rho_j ln(w_j/(w_j+d))
    Real out = 0;
    if (rho[i] > 0) out += rho[i] * std::log(omega[i] / (omega[i] - delta));
    if (rho[j] > 0) out += rho[j] * std::log(omega[j] / (omega[j] + delta));
    return out;
}

}  // namespace qfkit
