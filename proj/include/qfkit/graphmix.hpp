#pragma once

#include "qfkit/bounds.hpp"
#include "qfkit/channels.hpp"
#include "qfkit/entropy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace qfkit {

struct GraphSpec {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // unordered pairs, i < j
    bool regular = false;
    int degree = 0;
};

namespace graph_detail {

inline bool is_prime(int q) {
    if (q < 2) return false;
    for (int p = 2; p * p <= q; ++p)
        if (q % p == 0) return false;
    return true;
}

}  // namespace graph_detail

inline GraphSpec graph_from_edges(int n, std::vector<std::pair<int, int>> edges) {
    if (n < 1) throw std::invalid_argument("graph: need at least one vertex");
    std::set<std::pair<int, int>> seen;
    for (auto& [i, j] : edges) {
        if (i == j) throw std::invalid_argument("graph: self-loop at vertex " + std::to_string(i));
        if (i > j) std::swap(i, j);
        if (i < 0 || j >= n) throw std::invalid_argument("graph: vertex index out of range");
        if (!seen.insert({i, j}).second) throw std::invalid_argument("graph: duplicate edge");
    }
    GraphSpec g;
    g.n = n;
    g.edges = std::move(edges);
    std::vector<int> deg(n, 0);
    for (auto& [i, j] : g.edges) {
        ++deg[i];
        ++deg[j];
    }
    g.regular = std::all_of(deg.begin(), deg.end(), [&](int d) { return d == deg[0]; });
    g.degree = g.regular ? deg[0] : -1;
    return g;
}

inline bool is_connected(const GraphSpec& g) {
    if (g.n == 0) return false;
    std::vector<char> vis(g.n, 0);
    std::deque<int> q{0};
    vis[0] = 1;
    int count = 1;
    std::vector<std::vector<int>> adj(g.n);
    for (auto& [i, j] : g.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int w : adj[v])
            if (!vis[w]) {
                vis[w] = 1;
                ++count;
                q.push_back(w);
            }
    }
    return count == g.n;
}

inline bool is_bipartite(const GraphSpec& g) {
    std::vector<int> color(g.n, -1);
    std::vector<std::vector<int>> adj(g.n);
    for (auto& [i, j] : g.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (int s = 0; s < g.n; ++s) {
        if (color[s] != -1) continue;
        color[s] = 0;
        std::deque<int> q{s};
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : adj[v]) {
                if (color[w] == -1) {
                    color[w] = 1 - color[v];
                    q.push_back(w);
                } else if (color[w] == color[v]) {
                    return false;
                }
            }
        }
    }
    return true;
}

/// Generators: "cycle:n", "complete:n", "paley:q" (q prime, q = 1 mod 4).
inline GraphSpec build_graph(const std::string& kind) {
    auto colon = kind.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("build_graph: expected kind:parameter");
    const std::string name = kind.substr(0, colon);
    const int p = std::stoi(kind.substr(colon + 1));
    std::vector<std::pair<int, int>> edges;
    if (name == "cycle") {
        if (p < 3) throw std::invalid_argument("build_graph: cycle needs n >= 3");
        for (int i = 0; i < p; ++i) edges.emplace_back(i, (i + 1) % p);
        return graph_from_edges(p, std::move(edges));
    }
    if (name == "complete") {
        if (p < 2) throw std::invalid_argument("build_graph: complete needs n >= 2");
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) edges.emplace_back(i, j);
        return graph_from_edges(p, std::move(edges));
    }
    if (name == "paley") {
        if (!graph_detail::is_prime(p) || p % 4 != 1)
            throw std::invalid_argument("build_graph: paley needs a prime q = 1 mod 4");
        std::set<int> qr;
        for (int x = 1; x < p; ++x) qr.insert((x * x) % p);
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j)
                if (qr.count((j - i) % p)) edges.emplace_back(i, j);
        return graph_from_edges(p, std::move(edges));
    }
    throw std::invalid_argument("build_graph: unknown kind '" + name + "'");
}

/// Accepts generator shorthand, inline "edges:i-j,i-j,...", a JSON file
/// {"n":int,"edges":[[i,j],...]}, or a whitespace edge-list file.
inline GraphSpec parse_graph_spec(const std::string& spec) {
    if (spec.rfind("cycle:", 0) == 0 || spec.rfind("complete:", 0) == 0 || spec.rfind("paley:", 0) == 0)
        return build_graph(spec);
    if (spec.rfind("edges:", 0) == 0) {
        std::vector<std::pair<int, int>> edges;
        int n = 0;
        std::stringstream ss(spec.substr(6));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            auto dash = tok.find('-');
            if (dash == std::string::npos) throw std::invalid_argument("parse_graph_spec: expected i-j pairs");
            int i = std::stoi(tok.substr(0, dash)), j = std::stoi(tok.substr(dash + 1));
            edges.emplace_back(i, j);
            n = std::max({n, i + 1, j + 1});
        }
        return graph_from_edges(n, std::move(edges));
    }
    std::ifstream in(spec);
    if (!in) throw std::invalid_argument("parse_graph_spec: cannot open '" + spec + "'");
    if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
        nlohmann::json j;
        in >> j;
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        return graph_from_edges(j.at("n").get<int>(), std::move(edges));
    }
    std::vector<std::pair<int, int>> edges;
    int n = 0, a = 0, b = 0;
    while (in >> a >> b) {
        edges.emplace_back(a, b);
        n = std::max({n, a + 1, b + 1});
    }
    return graph_from_edges(n, std::move(edges));
}

/// Eigenvalues of A/m, sorted non-increasing. Requires regular + connected.
inline RVec adjacency_spectrum(const GraphSpec& g) {
    if (!g.regular) throw std::invalid_argument("adjacency_spectrum: graph is not regular");
    if (!is_connected(g)) throw std::invalid_argument("adjacency_spectrum: graph is not connected");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (auto& [i, j] : g.edges) a(i, j) = a(j, i) = 1.0 / g.degree;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

/// |lambda_2|: magnitude of the second largest (by value) normalized adjacency
/// eigenvalue. The two-sided expander constant lives in mixing_gamma.
inline Real adjacency_gamma(const GraphSpec& g) {
    RVec ev = adjacency_spectrum(g);
    return ev.size() > 1 ? std::abs(ev[1]) : 0.0;
}

/// max{|lambda_2|, |lambda_n|}, the constant of the expander mixing bound;
/// equals 1 exactly for bipartite graphs.
inline Real mixing_gamma(const GraphSpec& g) {
    RVec ev = adjacency_spectrum(g);
    return ev.size() > 1 ? std::max(std::abs(ev[1]), std::abs(ev[ev.size() - 1])) : 0.0;
}

inline Mat transposition_unitary(int n, int i, int j) {
    Mat u = Mat::Identity(n, n);
    u(i, i) = u(j, j) = 0;
    u(i, j) = u(j, i) = 1;
    return u;
}

inline ChannelRep edge_expectation(const GraphSpec& g, int i, int j) {
    auto e = std::minmax(i, j);
    if (!std::count(g.edges.begin(), g.edges.end(), std::make_pair(e.first, e.second)))
        throw std::invalid_argument("edge_expectation: (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") is not an edge");
    return ChannelRep::from_mixture(
        {{0.5, Mat::Identity(g.n, g.n)}, {0.5, transposition_unitary(g.n, i, j)}});
}

/// Superoperator of the expectation onto the joint fixed algebra span{1, J}:
/// diagonal entries average to t, off-diagonal entries to o.
inline Mat graph_expectation_superop(int n) {
    Mat s = Mat::Zero(n * n, n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const int row = a * n + b;
            if (a == b) {
                for (int c = 0; c < n; ++c) s(row, c * n + c) += 1.0 / n;
            } else {
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        if (c != d) s(row, c * n + d) += 1.0 / Real(n * n - n);
            }
        }
    return s;
}

/// Conditional expectation fixed by every edge unitary. Edge transpositions of
/// a connected graph generate the full symmetric group, so this is the S_n
/// average regardless of the edge set.
inline ChannelRep graph_expectation(const GraphSpec& g) {
    if (!is_connected(g)) throw std::invalid_argument("graph_expectation: graph must be connected");
    Mat j = superop_to_choi(graph_expectation_superop(g.n), g.n);
    return ChannelRep::from_choi((j + j.adjoint()) / 2.0);
}

/// Phi_G = (1/|E|) sum E_{i,j}: identity with probability 1/2, else a random edge swap.
inline ChannelRep phi_graph(const GraphSpec& g) {
    if (g.edges.empty()) throw std::invalid_argument("phi_graph: no edges");
    std::vector<std::pair<Real, Mat>> mix;
    mix.emplace_back(0.5, Mat::Identity(g.n, g.n));
    for (auto& [i, j] : g.edges) mix.emplace_back(0.5 / g.edges.size(), transposition_unitary(g.n, i, j));
    return ChannelRep::from_mixture(std::move(mix));
}

/// Classical transference step: out = sum_g q_g g(p), the pushforward of p
/// under left multiplication. Closure is checked lazily: a product that leaves
/// the supplied element set raises an error naming it.
inline std::vector<Real> group_transfer_step(const std::vector<std::vector<int>>& elements,
                                             const std::vector<Real>& q, const std::vector<Real>& p) {
    const size_t n = elements.size();
    if (q.size() != n || p.size() != n)
        throw std::invalid_argument("group_transfer_step: q and p must index the element list");
    std::map<std::vector<int>, int> lookup;
    for (size_t i = 0; i < n; ++i) {
        const auto& e = elements[i];
        for (int v : e)
            if (v < 0 || v >= static_cast<int>(e.size()))
                throw std::invalid_argument("group_transfer_step: invalid permutation entry");
        lookup[e] = static_cast<int>(i);
    }
    std::vector<Real> out(n, 0.0);
    for (size_t gi = 0; gi < n; ++gi) {
        if (q[gi] == 0) continue;
        for (size_t hi = 0; hi < n; ++hi) {
            if (p[hi] == 0) continue;
            std::vector<int> prod(elements[gi].size());
            for (size_t k = 0; k < prod.size(); ++k) prod[k] = elements[gi][elements[hi][k]];
            auto it = lookup.find(prod);
            if (it == lookup.end())
                throw std::invalid_argument("group_transfer_step: product of elements " + std::to_string(gi) +
                                            " and " + std::to_string(hi) + " falls outside the set");
            out[it->second] += q[gi] * p[hi];
        }
    }
    return out;
}

struct WalkExtremes {
    Real p_min = 0;
    Real p_max = 1;
    bool parity_restricted = false;
};

/// Exact distribution of the unlazy +-1 walk on a cycle after `steps` steps
/// from vertex 0; extremes are taken over the reachable parity class when the
/// cycle is bipartite (even n).
inline WalkExtremes walk_extremes(const GraphSpec& g, long steps) {
    if (!g.regular || g.degree != 2 || !is_connected(g))
        throw std::invalid_argument("walk_extremes: expects a cycle graph");
    const int n = g.n;
    if (n > 64) throw std::invalid_argument("walk_extremes: classical DP capped at n = 64");
    if (steps < 0) throw std::invalid_argument("walk_extremes: steps must be >= 0");
    std::vector<Real> p(n, 0.0), q(n, 0.0);
    p[0] = 1.0;
    for (long s = 0; s < steps; ++s) {
        std::fill(q.begin(), q.end(), 0.0);
        for (int v = 0; v < n; ++v) {
            if (p[v] == 0) continue;
            q[(v + 1) % n] += 0.5 * p[v];
            q[(v + n - 1) % n] += 0.5 * p[v];
        }
        std::swap(p, q);
    }
    WalkExtremes out;
    out.parity_restricted = (n % 2 == 0);
    Real mn = 1, mx = 0;
    for (int v = 0; v < n; ++v) {
        if (out.parity_restricted && ((v + steps) % 2 != 0)) continue;
        mn = std::min(mn, p[v]);
        mx = std::max(mx, p[v]);
    }
    out.p_min = mn;
    out.p_max = mx;
    return out;
}

/// Binary relative entropy D(p||q) in nats, 0 ln 0 = 0.
inline Real binary_rel_entropy(Real p, Real q) {
    if (p < 0 || p > 1) throw std::domain_error("binary_rel_entropy: p outside [0,1]");
    if (q <= 0 || q >= 1) throw std::domain_error("binary_rel_entropy: q outside (0,1)");
    Real d = 0;
    if (p > 0) d += p * std::log(p / q);
    if (p < 1) d += (1 - p) * std::log((1 - p) / (1 - q));
    return d;
}

/// Simplified closed-form exponent (m-1) k (ln(5/2)/5 + 7/60);
/// diagnostic only, never used for certification (the first Taylor constant
/// fails a direct check at n = 3).
inline Real graphthm_simplified_exponent(int m, long k) {
    return (m - 1) * Real(k) * (std::log(2.5) / 5.0 + 7.0 / 60.0);
}

/// L(rho) = (1/m) sum_{(i,j) in E} (rho - u rho u), as an n^2 x n^2 superoperator.
inline Mat graph_lindbladian(const GraphSpec& g) {
    if (!g.regular) throw std::invalid_argument("graph_lindbladian: graph must be regular");
    const int n = g.n;
    Mat l = Mat::Zero(n * n, n * n);
    for (auto& [i, j] : g.edges) {
        const Mat u = transposition_unitary(n, i, j);
        l += Mat::Identity(n * n, n * n) - kron(u, u.conjugate());
    }
    return l / Real(g.degree);
}

/// e^{-tL} rho by spectral decomposition of the Hermitian superoperator.
inline Density semigroup_evolve(const Mat& l, const Density& rho, Real t) {
    if (t < 0) throw std::invalid_argument("semigroup_evolve: t must be >= 0");
    require_hermitian(l, "Lindbladian superoperator");
    Spectrum s = spectral_decompose(l);
    if (s.eigenvalues.minCoeff() < -1e-9)
        throw std::invalid_argument("semigroup_evolve: generator has spectrum below -1e-9");
    const int d = rho.dim();
    Vec v = s.eigenvectors.adjoint() * vec_rm(rho.mat());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= std::exp(-t * std::max(s.eigenvalues[i], Real(0)));
    Mat out = unvec_rm(s.eigenvectors * v, d);
    return Density((out + out.adjoint()) / 2.0);
}

struct DecayCurve {
    std::vector<Real> times;
    std::vector<Real> values;
};

/// D(rho_t || E(rho)) along the semigroup; non-increasing by data processing.
inline DecayCurve decay_curve(const Mat& l, const Density& rho, const ChannelRep& e,
                              const std::vector<Real>& times) {
    require_hermitian(l, "Lindbladian superoperator");
    Spectrum s = spectral_decompose(l);
    if (s.eigenvalues.minCoeff() < -1e-9)
        throw std::invalid_argument("decay_curve: generator has spectrum below -1e-9");
    const int d = rho.dim();
    const Density target = e(rho);
    Vec base = s.eigenvectors.adjoint() * vec_rm(rho.mat());
    DecayCurve out;
    Real prev = std::numeric_limits<Real>::infinity();
    for (Real t : times) {
        if (t < 0) throw std::invalid_argument("decay_curve: negative time");
        Vec v = base;
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= std::exp(-t * std::max(s.eigenvalues[i], Real(0)));
        Mat m = unvec_rm(s.eigenvectors * v, d);
        const Real dval = relative_entropy(Density((m + m.adjoint()) / 2.0), target).as_real();
        if (dval > prev + 1e-8) throw std::runtime_error("decay_curve: relative entropy increased along the flow");
        prev = dval;
        out.times.push_back(t);
        out.values.push_back(dval);
    }
    return out;
}

/// min_j lambda_j / alpha.
inline Real mlsi_merge(const std::vector<Real>& lambdas, Real alpha) {
    if (lambdas.empty() || alpha <= 0) throw std::invalid_argument("mlsi_merge: need nonempty lambdas, alpha > 0");
    Real mn = lambdas.front();
    for (Real l : lambdas) {
        if (l <= 0) throw std::invalid_argument("mlsi_merge: lambdas must be positive");
        mn = std::min(mn, l);
    }
    return mn / alpha;
}

/// Max residual of the classical restriction: diag(L(diag(p))) vs the
/// degree-normalized Laplacian, plus structural leakage checks (diagonal in,
/// diagonal out; partially diagonal with a qubit extension stays so).
inline Real classical_restriction_check(const GraphSpec& g, const std::vector<Real>& p) {
    if (static_cast<int>(p.size()) != g.n) throw std::invalid_argument("classical_restriction_check: size mismatch");
    const int n = g.n;
    const Mat l = graph_lindbladian(g);
    Mat rho = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) rho(i, i) = p[i];
    Mat lr = unvec_rm(l * vec_rm(rho), n);
    // degree-normalized Laplacian action on p
    std::vector<Real> lap(n, 0.0);
    for (auto& [i, j] : g.edges) {
        lap[i] += (p[i] - p[j]) / g.degree;
        lap[j] += (p[j] - p[i]) / g.degree;
    }
    Real resid = 0;
    for (int i = 0; i < n; ++i) resid += std::abs(lr(i, i).real() - lap[i]);
    Real offdiag = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) offdiag += std::abs(lr(i, j));
    // partially diagonal rho~ = sum_x |x><x| (x) rho_x with a qubit extension
    Rng rng(1234);
    Mat rt = Mat::Zero(2 * n, 2 * n);
    for (int x = 0; x < n; ++x) {
        Mat gx = rng.ginibre(2, 2);
        Mat blk = gx * gx.adjoint();
        blk *= p[x] / std::max(blk.trace().real(), 1e-300);
        rt.block(2 * x, 2 * x, 2, 2) = blk;
    }
    // (L (x) id)(rho~)[(a,s),(b,t)] = sum_{cd} L[(a,b),(c,d)] rho~[(c,s),(d,t)]
    Mat big = Mat::Zero(2 * n, 2 * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) {
                    Cplx acc = 0;
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d)
                            acc += l(a * n + b, c * n + d) * rt(2 * c + s, 2 * d + t);
                    big(2 * a + s, 2 * b + t) = acc;
                }
    Real offblock = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            offblock += big.block(2 * a, 2 * b, 2, 2).cwiseAbs().sum();
        }
    return std::max({resid, offdiag, offblock});
}

struct MixCertificate {
    Real gamma = 1;
    Real c = 1;
    Real zeta = 1;
    long k = 0;
    long t = 0;
    Real alpha_sqf = 0;
    Real lambda_cert = 0;
    std::string convention = "edge-CMLSI-1, L = (1/m) sum (rho - u rho u)";
    bool trivial = true;
    std::string reason;
};

namespace graph_detail {

struct PencilBasis {
    Mat v;         // support basis of Choi(E_G)
    RVec inv_sqrt; // eigenvalue^{-1/2} on the support
};

inline PencilBasis choi_support(const Mat& je) {
    Spectrum s = spectral_decompose(je);
    const Real cut = 1e-12 * std::max(s.eigenvalues.maxCoeff(), Real(0));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        if (s.eigenvalues[i] > cut) keep.push_back(i);
    PencilBasis out;
    out.v.resize(je.rows(), keep.size());
    out.inv_sqrt.resize(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
        out.v.col(i) = s.eigenvectors.col(keep[i]);
        out.inv_sqrt[i] = 1.0 / std::sqrt(s.eigenvalues[keep[i]]);
    }
    return out;
}

}  // namespace graph_detail

/// Certificate sweep. Two derivations compete and the smaller alpha wins:
///  - the spectral grid path (zeta = n gamma^t with the two-sided expander
///    gamma, Chernoff-counted walk steps), available when mixing_gamma < 1;
///  - the measured path: decompose Phi_G^N = (1-zeta_N) E_G + zeta_N Phi~ by an
///    explicit Choi pencil, certify the residual PSD and c = max{c : Choi(Phi~)
///    <= c Choi(E_G)}, then alpha = N/(|E| beta_{c,zeta_N}).
/// lambda_cert = 2 beta/(k m) and 2|E| beta/(m N) respectively, i.e. 2/(m alpha).
inline MixCertificate cmlsi_certificate(const GraphSpec& g, std::pair<long, long> grid_k = {0, 0},
                                        std::pair<long, long> grid_t = {0, 0}) {
    if (!g.regular) throw std::invalid_argument("cmlsi_certificate: graph must be regular");
    if (!is_connected(g)) throw std::invalid_argument("cmlsi_certificate: graph must be connected");
    const int n = g.n;
    const int m = g.degree;
    const long ecount = static_cast<long>(g.edges.size());
    const Real gmix = mixing_gamma(g);

    MixCertificate best;
    best.gamma = gmix;

    // spectral grid path
    if (gmix < 1.0 - 1e-12) {
        const Real c = Real(n) * n / 2.0 - Real(n) / 2.0 + 1.0;
        const long t0 = static_cast<long>(std::ceil(std::log(1.0 / n) / std::log(gmix)));
        const long tlo = grid_t.first > 0 ? grid_t.first : std::max<long>(t0, 1);
        const long thi = grid_t.second > 0 ? grid_t.second : 4 * std::max<long>(t0, 1);
        for (long t = tlo; t <= thi; ++t) {
            const Real zeta = std::min(1.0, n * std::pow(gmix, Real(t)));
            const Real beta = beta_c_zeta(c, zeta);
            if (beta <= 0) continue;
            for (int kappa = 2; kappa <= 12; ++kappa) {
                long k = static_cast<long>(std::ceil(Real(kappa) * t / (m - 1)));
                if (grid_k.first > 0 && (k < grid_k.first || k > grid_k.second)) continue;
                if (t > (m - 1) * k / 2) continue;
                const Real nu = Real(t) / (Real(m - 1) * n * k);
                const Real q = 1.0 / (2.0 * n);
                if (nu >= q) continue;
                const Real chern = 1.0 - std::exp(-Real(ecount) * k * binary_rel_entropy(nu, q));
                if (chern <= 0) continue;
                const Real alpha = Real(k) / (beta * chern);
                if (best.trivial || alpha < best.alpha_sqf) {
                    best.trivial = false;
                    best.c = c;
                    best.zeta = zeta;
                    best.k = k;
                    best.t = t;
                    best.alpha_sqf = alpha;
                    best.lambda_cert = 2.0 * beta * chern / (Real(k) * m);
                    best.convention = "edge-CMLSI-1, L = (1/m) sum (rho - u rho u); spectral grid path";
                }
            }
        }
    }

    // measured pencil path (rep dimension capped for the dense superoperators)
    if (n <= 16) {
        const Mat se = graph_expectation_superop(n);
        const Mat je = superop_to_choi(se, n);
        const auto pb = graph_detail::choi_support(je);
        const Mat sp = phi_graph(g).superop();
        const std::vector<long> ngrid = {1,  2,  3,  4,   6,   8,   12,  16,  24,  32,   48,   64,
                                         96, 128, 192, 256, 384, 512, 768, 1024, 1536, 2048, 3072, 4096};
        Mat cur = Mat::Identity(n * n, n * n);
        long cur_n = 0;
        int worse_streak = 0;
        for (long N : ngrid) {
            if (N > 8L * n * n * n) break;
            // advance cur to sp^N by binary powering over the gap
            long gap = N - cur_n;
            Mat base = sp;
            while (gap > 0) {
                if (gap & 1) cur = cur * base;
                base = base * base;
                gap >>= 1;
            }
            cur_n = N;
            const Mat j = superop_to_choi(cur, n);
            // w* restricted to supp Choi(E_G); Choi(Phi^N) support grows into it
            Mat mj = pb.inv_sqrt.asDiagonal() * (pb.v.adjoint() * j * pb.v) * pb.inv_sqrt.asDiagonal();
            const Real lmin = min_eigenvalue((mj + mj.adjoint()) / 2.0);
            Real w = std::max(lmin, 0.0);
            // certify: Choi(Phi^N) - w Choi(E_G) must be PSD on the full space
            for (int it = 0; it < 30 && w > 0 && min_eigenvalue(j - w * je) < -1e-10; ++it) w *= 0.999999;
            if (w <= 1e-9) continue;
            const Real zeta = 1.0 - w;
            if (zeta < 1e-9) break;  // converged onto E_G
            Mat jres = (j - w * je) / zeta;
            // certified c: Choi(residual) <= c Choi(E_G); support containment first
            Mat jr_out = jres - pb.v * (pb.v.adjoint() * jres * pb.v) * pb.v.adjoint();
            if (jr_out.cwiseAbs().maxCoeff() > 1e-8) continue;
            Mat mc = pb.inv_sqrt.asDiagonal() * (pb.v.adjoint() * jres * pb.v) * pb.inv_sqrt.asDiagonal();
            const Real c = std::max(max_eigenvalue((mc + mc.adjoint()) / 2.0), 1.0);
            const Real beta = beta_c_zeta(c, zeta);
            if (beta <= 0) continue;
            const Real alpha = Real(N) / (Real(ecount) * beta);
            if (best.trivial || alpha < best.alpha_sqf) {
                best.trivial = false;
                best.c = c;
                best.zeta = zeta;
                best.k = N;
                best.t = N;
                best.alpha_sqf = alpha;
                best.lambda_cert = 2.0 * Real(ecount) * beta / (Real(m) * N);
                best.convention = "edge-CMLSI-1, L = (1/m) sum (rho - u rho u); measured pencil path";
                worse_streak = 0;
            } else if (++worse_streak > 4) {
                break;
            }
        }
    }

    if (best.trivial)
        best.reason = gmix >= 1.0 - 1e-12 ? "bipartite parity obstruction (grid path unavailable)"
                                          : "no grid point reached beta, chernoff > 0";
    return best;
}

}  // namespace qfkit
