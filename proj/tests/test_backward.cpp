#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rsg/backward.hpp"
#include "rsg/equilibrium.hpp"
#include "rsg/instances.hpp"

#include <cmath>
#include <sstream>

using namespace rsg;

namespace {

double max_dev(const MatrixPath& a, const MatrixPath& b) {
    double m = 0.0;
    for (int k = 0; k <= a.grid().N; ++k) m = std::max(m, (a.node(k) - b.node(k)).cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

TEST_CASE("follower Riccati on the pure quadratic case") {
    // P' = P^2, P(1) = 1  =>  P(t) = 1 / (2 - t)
    ScalarGame p;
    p.Q = 0;
    GameSpec s = scalar_spec(p, 200);
    MatrixPath P = solve_riccati_follower(s).P;
    CHECK(P.node(0)(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(P(0.5)(0, 0) == doctest::Approx(1.0 / 1.5).epsilon(1e-10));
}

TEST_CASE("R-1 on the pure quadratic case") {
    ScalarGame p;
    p.Q = 0;
    p.G = -1;
    p.alpha = 2;
    GameSpec s = scalar_spec(p, 200);
    MatrixPath P1 = solve_riccati_R1(s).P;
    CHECK(P1.node(s.grid.N)(0, 0) == 1.0);
    CHECK(P1.node(0)(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("R-1 vanishes in the homogeneous game") {
    GameSpec s = homogeneous_game(2, 1.0, 50);
    MatrixPath P1 = solve_riccati_R1(s).P;
    for (int k = 0; k <= 50; ++k) CHECK(P1.node(k).norm() == 0.0);
}

TEST_CASE("terminal values are exact") {
    GameSpec s = scalar_spec(production_style(), 64);
    CHECK(solve_riccati_follower(s).P.node(64) == s.G);
    CHECK(solve_riccati_R1(s).P.node(64) == -s.G);
}

TEST_CASE("follower solution stays symmetric") {
    std::mt19937_64 rng(3);
    for (int tries = 0; tries < 20; ++tries) {
        GameSpec s = random_spec(rng, 3, false, 100);
        try {
            MatrixPath P = solve_riccati_follower(s).P;
            for (int k = 0; k <= 100; ++k) CHECK((P.node(k) - P.node(k).transpose()).norm() <= 1e-10 * (1 + P.node(k).norm()));
            return;
        } catch (const SolverError&) {
        }
    }
    FAIL("no solvable draw");
}

TEST_CASE("Lyapunov equation against the scalar exponential") {
    const double a = 0.3, c = 0.4, q = 1.5, g = 2.0, kk = 2 * a + c * c;
    TimeGrid grid = make_grid(1.0, 100);
    auto cst = [](double v) { return [v](double) { return Mat::Constant(1, 1, v).eval(); }; };
    MatrixPath L = solve_lyapunov(cst(a), cst(c), cst(q), Mat::Constant(1, 1, g), grid);
    for (double t : {0.0, 0.25, 0.8}) {
        double want = (g + q / kk) * std::exp(kk * (1 - t)) - q / kk;
        CHECK(L(t)(0, 0) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("offset is zero for zero sources") {
    GameSpec s = scalar_spec(production_style(), 50);
    MatrixPath P = solve_riccati_follower(s).P;
    RiccatiProblem r = r4_problem(s, P);
    MatrixPath Ph = solve_riccati_generalized(r).P;
    OffsetSolution o = solve_offset(r, Ph, [&](double) {
        return OffsetSources{Mat::Zero(r.d, 1), Mat::Zero(r.d, 1), Mat::Zero(r.d, 1)};
    });
    for (int k = 0; k <= 50; ++k) CHECK(o.phi.node(k).norm() == 0.0);
}

TEST_CASE("closed form agrees with direct integration without the fraction term") {
    TimeGrid g = make_grid(1.0, 200);
    Mat A1(2, 2), A2(2, 2), B1(2, 2), Q(2, 2), G(2, 2);
    A1 << 0.2, 0.1, -0.3, 0.0;
    A2 << 0.1, 0.0, 0.2, -0.1;
    B1 << 0.5, 0.1, 0.1, 0.3;
    Q << 1.0, 0.2, 0.2, 0.5;
    G << 1.0, 0.0, 0.0, 2.0;
    RiccatiProblem prob = RiccatiProblem::from_paths(MatrixPath::constant(g, A1), MatrixPath::constant(g, A2),
                                                     MatrixPath::constant(g, B1), MatrixPath::constant(g, Q), G);
    MatrixPath a = solve_riccati_generalized(prob).P;
    MatrixPath b = closed_form_special_case(prob).P;
    CHECK(max_dev(a, b) < 1e-9);
}

TEST_CASE("closed form refuses the fraction term") {
    GameSpec s = scalar_spec(production_style(), 20);
    MatrixPath P = solve_riccati_follower(s).P;
    CHECK_THROWS_AS(closed_form_special_case(r4_problem(s, P)), SolverError);
}

TEST_CASE("RK4 step halving shows fourth order") {
    GameSpec base = scalar_spec(production_style(), 8);
    double v[3];
    for (int i = 0; i < 3; ++i) v[i] = solve_riccati_follower(regrid(base, 8 << i)).P.node(0)(0, 0);
    double ratio = (v[0] - v[1]) / (v[1] - v[2]);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("finite-difference residuals are small for an exact solution") {
    // P(t) = 1/(2-t) sampled exactly satisfies P' = P^2
    TimeGrid g = make_grid(1.0, 100);
    std::vector<Mat> s;
    for (int k = 0; k <= 100; ++k) s.push_back(Mat::Constant(1, 1, 1.0 / (2.0 - g.t(k))));
    MatrixPath P(g, s);
    RiccatiProblem prob = RiccatiProblem::from_paths(MatrixPath::zeros(g, 1, 1), MatrixPath::zeros(g, 1, 1),
                                                     MatrixPath::constant(g, -Mat::Identity(1, 1)),
                                                     MatrixPath::zeros(g, 1, 1), Mat::Identity(1, 1));
    for (double r : riccati_residuals(prob, P)) CHECK(r < 1e-6);  // one-sided end stencils, h^4 f'''''/5
}

TEST_CASE("csv layout") {
    TimeGrid g = make_grid(1.0, 2);
    MatrixPath p = MatrixPath::constant(g, Mat::Identity(2, 2));
    std::ostringstream os;
    write_csv(os, p, "P");
    const std::string out = os.str();
    CHECK(out.substr(0, out.find('\n')) == "t, P_11, P_12, P_21, P_22");
    CHECK(std::count(out.begin(), out.end(), '\n') == 4);
}
