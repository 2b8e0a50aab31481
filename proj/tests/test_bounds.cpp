#include "qfkit/bounds.hpp"
#include "qfkit/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qfkit;

namespace {
Mat hadamard2() {
    Mat h(2, 2);
    h << 1, 1, 1, -1;
    return h / std::sqrt(2.0);
}
}  // namespace

TEST_CASE("tilde_zeta_admissible") {
    CHECK(tilde_zeta_admissible(3, 0.0, 0.5) == 0.0);
    CHECK(tilde_zeta_admissible(2, 0.5, 0.5) == Catch::Approx(0.0769230769));
    // dominates the closed-form 15/(57d+88) once b equalizes the two branches
    // (the closed form descends from b ~ (1 - a/4)/2, not b = 1/2)
    const Real a = 0.5;
    for (int d = 2; d <= 64; ++d) {
        const Real mid = a * d + 2 * d + 2;
        const Real b_eq = (mid - std::sqrt(mid * mid - 4 * a * d * (d + 1))) / (2 * a * d);
        CHECK(tilde_zeta_admissible(d, a, b_eq) >= 15.0 / (57.0 * d + 88.0) - 1e-12);
    }
    CHECK_THROWS_AS(tilde_zeta_admissible(2, 1.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(tilde_zeta_admissible(2, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("approx beta and zeta max") {
    CHECK(approx_beta(3, 0.0) == 1.0);
    CHECK(approx_zeta_max(2) == Catch::Approx(15.0 / 106.0));
    CHECK(approx_beta(2, 0.01) == Catch::Approx(0.9355704698).epsilon(1e-9));
    CHECK_THROWS_AS(approx_beta(2, 0.15), std::invalid_argument);
}

TEST_CASE("beta_c_zeta anchors and tightness") {
    CHECK(beta_c_zeta(3, 0.0) == 1.0);
    CHECK(beta_c_zeta(2, 0.01) == Catch::Approx(0.7413133).epsilon(1e-6));
    CHECK(beta_c_zeta(1, 0.01) == Catch::Approx(0.7835294).epsilon(1e-6));
    // monotone approach to 1 as zeta -> 0, for fixed c
    Real prev = -std::numeric_limits<Real>::infinity();
    for (int k = 1; k <= 6; ++k) {
        const Real b = beta_c_zeta(2.0, std::pow(10.0, -k));
        CHECK(b > prev);
        prev = b;
    }
    CHECK(prev > 0.999);
    // approx_beta asymptotically tight as well
    prev = -1;
    for (int k = 2; k <= 6; ++k) {
        const Real b = approx_beta(3, std::pow(10.0, -k));
        CHECK(b > prev);
        prev = b;
    }
    CHECK(prev > 0.999);
}

TEST_CASE("ephi_constant") {
    CHECK(ephi_constant(2, 1.0, 0.0) == Catch::Approx(keylem_g(2)));
    CHECK(ephi_constant(2, 1.0) == Catch::Approx(10.3547977982).epsilon(1e-9));
    CHECK(ephi_constant(1 + 1e-9, 1.0) == Catch::Approx(8.0).epsilon(1e-6));
    CHECK_THROWS_AS(ephi_constant(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ephi_constant(2.0, 0.0), std::invalid_argument);
}

TEST_CASE("revconv_check") {
    // frozen instance from the spec
    Mat rho_m = Mat::Zero(2, 2);
    rho_m(0, 0) = 0.75;
    rho_m(1, 1) = 0.25;
    Density rho(rho_m);
    Density sigma = maximally_mixed(2);
    Mat eta_m = Mat::Zero(2, 2);
    eta_m(0, 0) = 0.6;
    eta_m(1, 1) = 0.4;
    Density eta(eta_m);
    Density omega(Mat(0.9 * sigma.mat() + 0.1 * eta.mat()));
    RevconvSlacks s = revconv_check(rho, sigma, omega, 1.2, 0.1);
    CHECK(s.slack1 >= 0);
    CHECK(s.slack2 >= 0);
    CHECK((s.eta.mat() - eta.mat()).cwiseAbs().maxCoeff() < 1e-12);

    // sandwich violation detected
    Mat far = Mat::Zero(2, 2);
    far(0, 0) = 1;
    CHECK_THROWS_AS(revconv_check(rho, sigma, Density(far), 1.2, 0.1), std::invalid_argument);

    // randomized forward-built instances
    for (int t = 0; t < 500; ++t) {
        const int d = 2 + t % 4;
        Rng rng(2200 + t);
        Density sg = random_density(d, Ensemble::HilbertSchmidt, rng.raw());
        Density et = random_density(d, Ensemble::HilbertSchmidt, rng.raw());
        const Real zeta = 0.05 + 0.85 * rng.uniform();
        const Real c = std::max(loewner_pencil_max(et.mat(), sg.mat()), 1.0) + 1e-9;
        Density om(Mat((1 - zeta) * sg.mat() + zeta * et.mat()));
        Density rr = random_density(d, Ensemble::HilbertSchmidt, rng.raw());
        RevconvSlacks sl = revconv_check(rr, sg, om, c, zeta);
        CHECK(sl.slack1 >= -1e-8);
        CHECK(sl.slack2 >= -1e-8);
    }
}

TEST_CASE("thmrelent_check") {
    // rho = I/d: both sides vanish
    ThmRelentSlacks z = thmrelent_check(maximally_mixed(3), maximally_mixed(3), 0.5, 0.5);
    CHECK(z.slack == Catch::Approx(0.0).margin(1e-10));
    // self-majorization: worstsig slack exactly 0
    Density rho = random_density(3, Ensemble::HilbertSchmidt, 17);
    ThmRelentSlacks s = thmrelent_check(rho, rho, 0.5, 0.5);
    CHECK(s.worstsig_slack == Catch::Approx(0.0).margin(1e-9));
    CHECK(s.slack >= -1e-9);
    // majorization precondition enforced
    Density pure = random_density(3, Ensemble::Pure, 18);
    CHECK_THROWS_AS(thmrelent_check(maximally_mixed(3), pure, 0.5, 0.5), std::invalid_argument);
    // 11x11 grid optimizer returns an admissible pair
    auto [a, b] = tilde_zeta_best_ab(4);
    CHECK(tilde_zeta_admissible(4, a, b) >= tilde_zeta_admissible(4, 0.5, 0.5) - 1e-15);
}

TEST_CASE("schedule_compose") {
    ChannelRep comp = pinching_expectation(Mat::Identity(2, 2));
    ChannelRep had = pinching_expectation(hadamard2());
    std::vector<ChannelRep> es{comp, had};

    ScheduleResult single = schedule_compose(es, Schedule{{{1.0, {0}}}});
    CHECK((single.psi.choi() - comp.choi()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(single.k_counts == std::vector<int>{1, 0});

    ScheduleResult pair = schedule_compose(es, Schedule{{{1.0, {0, 1}}}});
    ChannelRep scalar = block_expectation(SubalgebraBlocks::scalar(2));
    CHECK((pair.psi.choi() - scalar.choi()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(pair.k_counts == std::vector<int>{1, 1});

    ScheduleResult alt = schedule_compose(es, Schedule{{{1.0, {0, 1, 0, 1}}}});
    CHECK((alt.psi.choi() - pair.psi.choi()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(alt.k_counts == std::vector<int>{2, 2});

    CHECK_THROWS_AS(schedule_compose(es, Schedule{{{0.9, {0}}}}), std::invalid_argument);
    CHECK_THROWS_AS(schedule_compose(es, Schedule{{{1.0, {5}}}}), std::invalid_argument);
}

TEST_CASE("qf_certificate") {
    // single-step case: alpha = k/beta at eps = zeta
    QfCertificate one = qf_certificate(2.0, 0.02, 3, {0.02});
    CHECK(!one.trivial);
    CHECK(one.power == 1);
    CHECK(one.alpha == Catch::Approx(3.0 / beta_c_zeta(2.0, 0.02)));

    // c=2, zeta=0.5, grid m=1..12: spec's printed beta anchor at m=6 holds,
    // and the actual grid minimum of m/beta sits at m=7
    std::vector<Real> grid;
    for (int m = 1; m <= 12; ++m) grid.push_back(std::pow(0.5, m));
    CHECK(beta_c_zeta(2.0, std::pow(0.5, 6)) == Catch::Approx(0.601438).epsilon(1e-5));
    QfCertificate q = qf_certificate(2.0, 0.5, 1, grid);
    CHECK(!q.trivial);
    CHECK(q.power == 7);
    CHECK(q.alpha == Catch::Approx(8.785276).epsilon(1e-5));

    // trivial when no grid entry clears beta > 0
    QfCertificate triv = qf_certificate(50.0, 0.5, 1, {0.5, 0.25});
    CHECK(triv.trivial);

    CHECK_THROWS_AS(qf_certificate(2.0, 0.5, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(qf_certificate(2.0, 0.5, 1, {0.7}), std::invalid_argument);
}

TEST_CASE("qf_certificate alpha grows sublinearly in c") {
    Real prev = 0;
    std::vector<Real> alphas;
    for (Real c : {10.0, 100.0, 1000.0}) {
        QfCertificate q = qf_certificate(c, 0.5, 1);
        REQUIRE(!q.trivial);
        // grid reaches past 1/c^2
        CHECK(q.epsilon_used <= 0.5);
        alphas.push_back(q.alpha);
        CHECK(q.alpha > prev);
        prev = q.alpha;
    }
    CHECK(alphas[1] / alphas[0] < 10.0);
    CHECK(alphas[2] / alphas[1] < 10.0);
    // default grid includes zeta^m past 1/c^2
    auto grid = default_epsilon_grid(1000.0, 0.5);
    CHECK(grid.back() < 1e-6);
}
