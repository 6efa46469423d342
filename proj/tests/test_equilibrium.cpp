#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rsg/equilibrium.hpp"
#include "rsg/instances.hpp"

#include <cmath>

using namespace rsg;

TEST_CASE("homogeneous game: zero strategies and zero value") {
    for (double xi : {0.0, 1.0}) {
        EquilibriumSolution sol = solve_game(homogeneous_game(2, xi, 60));
        Vec X = Vec::Ones(20);
        StrategyOutput o = feedback(sol, X, 0.4);
        CHECK(o.u1.norm() < 1e-14);
        CHECK(o.u2.norm() < 1e-14);
        CHECK(o.f.norm() < 1e-14);
        CHECK(o.f2.norm() < 1e-14);
        CHECK(std::abs(value(sol)) < 1e-14);
    }
}

TEST_CASE("value reduces to the initial quadratic form without noise or drift") {
    GameSpec s = homogeneous_game(2, 1.0, 60);
    s.Q = MatrixPath::constant(s.grid, Mat::Identity(2, 2));
    s.G = 0.5 * Mat::Identity(2, 2);
    EquilibriumSolution sol = solve_game(s);
    Mat Xi = sol.stages_at(0.0, 0).dh.Xi;
    double quad = (Xi.transpose() * sol.L.node(0) * Xi)(0, 0);
    CHECK(quad > 0.0);
    CHECK(value(sol) == doctest::Approx(quad).epsilon(1e-12));
    for (int k = 0; k <= 60; ++k) CHECK(sol.psi.node(k).norm() < 1e-14);
}

TEST_CASE("follower Riccati of the production example matches the scalar equation") {
    ScalarGame p = production_example(0.5, -0.5, 1.0, 1.0, -0.5, 0.2, 2.0);
    GameSpec s = scalar_spec(p, 400);
    MatrixPath P = solve_riccati_follower(s).P;
    MatrixPath b = scalar_bode(0.5, -0.5, 1.0, 1.0, -0.5, 2.0, 400);
    for (int k = 0; k <= 400; ++k) CHECK(P.node(k)(0, 0) == doctest::Approx(b.node(k)(0, 0)).epsilon(1e-12));
}

TEST_CASE("scalar equation with zero weights stays at zero") {
    // r1 > 0 keeps the follower weight positive at P = 0
    MatrixPath b = scalar_bode(0.5, -1.0, 0.0, 0.0, 1.0, 2.0, 100);
    for (int k = 0; k <= 100; ++k) CHECK(b.node(k)(0, 0) == 0.0);
}

TEST_CASE("scalar equation with c = -1 is linear") {
    // (1+c) = 0 removes the quadratic term
    const double a = 0.5, q = 1.0, g = 1.0, T = 2.0, lin = 2.0 * (1.0 - a) + 1.0;
    MatrixPath b = scalar_bode(a, -1.0, q, g, -0.5, T, 2000);
    double want = (g + q / lin) * std::exp(lin * T) - q / lin;
    CHECK(b.node(0)(0, 0) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("feedback is affine in the state") {
    EquilibriumSolution sol = solve_game(scalar_spec(production_style(), 80));
    Vec X1 = Vec::LinSpaced(10, -1, 1), X2 = Vec::LinSpaced(10, 0.5, -0.3), O = Vec::Zero(10);
    const double t = 0.33;
    StrategyOutput a = feedback(sol, X1, t), b = feedback(sol, X2, t), z = feedback(sol, O, t),
                   ab = feedback(sol, X1 + X2, t);
    CHECK((ab.u1 - a.u1 - b.u1 + z.u1).norm() < 1e-12);
    CHECK((ab.u2 - a.u2 - b.u2 + z.u2).norm() < 1e-12);
    CHECK((ab.f - a.f - b.f + z.f).norm() < 1e-12);
    CHECK((ab.f2 - a.f2 - b.f2 + z.f2).norm() < 1e-12);
}

TEST_CASE("clamping only touches negative controls") {
    StrategyOutput s;
    s.u1 = Vec::Constant(2, -1.0);
    s.u1(1) = 2.0;
    s.u2 = Vec::Constant(1, 0.5);
    s.f = Vec::Constant(1, -3.0);
    s.f2 = Vec::Constant(1, -4.0);
    StrategyOutput c = clamp_nonnegative(s);
    CHECK(c.u1(0) == 0.0);
    CHECK(c.u1(1) == 2.0);
    CHECK(c.u2(0) == 0.5);
    CHECK(c.f(0) == -3.0);
    CHECK(c.f2(0) == -4.0);
}

TEST_CASE("solve is deterministic") {
    GameSpec s = scalar_spec(production_style(), 60);
    EquilibriumSolution a = solve_game(s), b = solve_game(s);
    CHECK(value(a) == value(b));
    for (int k = 0; k <= 60; ++k) {
        CHECK(a.Phat.P.node(k) == b.Phat.P.node(k));
        CHECK(a.psi.node(k) == b.psi.node(k));
    }
}

TEST_CASE("terminal values of the stacked Riccati solution") {
    EquilibriumSolution sol = solve_game(scalar_spec(production_style(), 40), 1e-8, true);
    const int N = 40;
    CHECK(sol.Phat.P.node(N) == sol.stages_at(1.0, N).dh.G);
    REQUIRE(sol.P3.has_value());
    CHECK(sol.P2->P.node(N).rows() == 2);
    CHECK(sol.P3->P.node(N).rows() == 5);
}

TEST_CASE("value converges at second order in the step") {
    GameSpec s = scalar_spec(production_style(), 25);
    double v[3];
    for (int i = 0; i < 3; ++i) v[i] = value(solve_game(regrid(s, 25 << i)));
    double ratio = (v[0] - v[1]) / (v[1] - v[2]);
    MESSAGE("value ratio " << ratio);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("regularity failure is reported with a node") {
    // strongly negative follower weight cannot be compensated
    ScalarGame p = production_style();
    p.R1 = -5;
    try {
        solve_game(scalar_spec(p, 40));
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        CHECK(e.node >= 0);
    }
}
