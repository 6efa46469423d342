#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rsg/augment.hpp"
#include "rsg/equilibrium.hpp"
#include "rsg/instances.hpp"

using namespace rsg;

namespace {

Mat m11(double v) { return Mat::Constant(1, 1, v); }

}  // namespace

TEST_CASE("follower drift block for a unit scalar example") {
    ScalarGame p;
    p.A = 1;
    p.B1 = 1;
    p.D1 = 0;
    p.R1 = 1;
    p.alpha = 2;
    p.R0 = 1;
    p.C = 0;
    GameSpec s = scalar_spec(p, 10);
    HatBlocks h = build_hat(s, coeffs_at(s, 0.0), m11(1.0));
    Mat want(2, 2);
    want << 0, 0, -1, 1;
    CHECK((h.A1 - want).norm() < 1e-15);
}

TEST_CASE("leader inhomogeneity vanishes without drift and noise") {
    ScalarGame p = production_style();
    p.f1 = 0;
    p.sigma = 0;
    GameSpec s = scalar_spec(p, 10);
    CheckBlocks k = build_check(s, coeffs_at(s, 0.3), m11(0.7));
    CHECK(k.F1.norm() == 0.0);
    CHECK(k.sigma.norm() == 0.0);
}

TEST_CASE("cost weights for an indefinite follower weight") {
    ScalarGame p;
    p.R1 = -1;
    p.D1 = 1;
    GameSpec s = scalar_spec(p, 10);
    LeaderCostWeights w = build_cost_weights(s, coeffs_at(s, 0.0), m11(2.0));
    CHECK(w.Rt(0, 0) == doctest::Approx(1.0));
    CHECK(w.R(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("non-positive follower weight is a solver error") {
    ScalarGame p;
    p.R1 = -1;
    p.D1 = 1;
    GameSpec s = scalar_spec(p, 10);
    CHECK_THROWS_AS(build_cost_weights(s, coeffs_at(s, 0.0), m11(0.5)), SolverError);
}

TEST_CASE("non-negative leader weight is a solver error") {
    ScalarGame p;
    p.R2 = 0.5;
    GameSpec s = scalar_spec(p, 10);
    CHECK_THROWS_AS(build_cost_weights(s, coeffs_at(s, 0.0), m11(1.0)), SolverError);
}

TEST_CASE("block selector picks one block") {
    Mat M = block_selector(2, 3);
    CHECK(M.rows() == 2);
    CHECK(M.cols() == 20);
    Vec x = Vec::LinSpaced(20, 0, 19);
    Vec y = M * x;
    CHECK(y(0) == 4.0);
    CHECK(y(1) == 5.0);
}

TEST_CASE("stacked dimensions") {
    GameSpec s = homogeneous_game(2, 1.0, 10);
    StagePack st = build_stages(s, 0.5, Mat::Identity(2, 2));
    CHECK(st.hat.A1.rows() == 4);
    CHECK(st.bb.A.rows() == 10);
    CHECK(st.dh.A1.rows() == 20);
    CHECK(st.dh.Xi.rows() == 20);
}

TEST_CASE("sign pairing of the follower system") {
    // drift and adjoint drift differ only in the sign of the coupling block
    GameSpec s = scalar_spec(production_style(), 10);
    HatBlocks h = build_hat(s, coeffs_at(s, 0.2), m11(1.3));
    Mat d = h.A1 + h.A2;
    CHECK(d(1, 0) == doctest::Approx(0.0));
    CHECK(h.A1(0, 0) == h.A2(0, 0));
    CHECK(h.A1(1, 1) == h.A2(1, 1));
    CHECK(h.A1(1, 0) != 0.0);
}

TEST_CASE("homogeneous game has zero sources and zero offsets") {
    GameSpec s = homogeneous_game(2, 1.0, 10);
    StagePack st = build_stages(s, 0.5, 0.3 * Mat::Identity(2, 2));
    CHECK(st.dh.F.norm() == 0.0);
    CHECK(st.dh.Sigma.norm() == 0.0);
    CHECK(st.dh.Ups.norm() == 0.0);
    CHECK(st.w.rho.norm() == 0.0);
}

TEST_CASE("homogeneous game gives zero affine gains") {
    EquilibriumSolution sol = solve_game(homogeneous_game(2, 1.0, 40));
    for (int k : {0, 20, 40}) {
        GainPoint g = sol.gains_at(sol.spec.grid.t(k), k);
        CHECK(g.phiM1.norm() < 1e-14);
        CHECK(g.phiM2.norm() < 1e-14);
        CHECK(g.Zo.norm() < 1e-14);
    }
}

TEST_CASE("leader gain map agrees with component read-out") {
    EquilibriumSolution sol = solve_game(scalar_spec(production_style(), 100));
    const GameSpec& s = sol.spec;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int k : {0, 37, 99}) {
        const double t = s.grid.t(k);
        StagePack st = sol.stages_at(t, k);
        GainPoint g = sol.gains_at(t, k);
        Coeffs c = coeffs_at(s, t);
        const int d = 10 * s.n;
        Vec X(d);
        for (int i = 0; i < d; ++i) X(i) = nd(rng);
        Mat Y = sol.Phat.P.node(k) * X + sol.phihat.node(k);
        Mat Z = g.Zc * X + g.Zo;
        Mat direct = u2_from_components(c, sol.P.P.node(k), st.w, X, Y, Z);
        Mat viagain = g.RRi * (g.PM2 * X + g.phiM2);
        CHECK((direct - viagain).norm() <= 1e-10 * (1.0 + direct.norm()));
    }
}
