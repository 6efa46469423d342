#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rsg/instances.hpp"
#include "rsg/model.hpp"

#include <string>

using namespace rsg;

TEST_CASE("grid nodes hit T exactly") {
    TimeGrid g = make_grid(2.0, 3);
    auto v = g.nodes();
    REQUIRE(v.size() == 4);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 2.0);
    CHECK(g.dt() == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(make_grid(0.0, 3), SpecError);
    CHECK_THROWS_AS(make_grid(1.0, 0), SpecError);
}

TEST_CASE("linear interpolation between nodes") {
    TimeGrid g = make_grid(1.0, 2);
    std::vector<Mat> s = {Mat::Constant(1, 1, 0.0), Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 3.0)};
    MatrixPath p(g, s);
    CHECK(p(0.25)(0, 0) == doctest::Approx(0.5));
    CHECK(p(0.75)(0, 0) == doctest::Approx(2.0));
    CHECK(p(1.0)(0, 0) == 3.0);
    CHECK_THROWS(p(1.5));
    CHECK_THROWS(p(-0.1));
}

TEST_CASE("hermite interpolation is exact on cubics") {
    TimeGrid g = make_grid(1.0, 4);
    std::vector<Mat> s, d;
    auto f = [](double t) { return t * t * t - 2 * t; };
    auto fp = [](double t) { return 3 * t * t - 2; };
    for (int k = 0; k <= 4; ++k) {
        s.push_back(Mat::Constant(1, 1, f(g.t(k))));
        d.push_back(Mat::Constant(1, 1, fp(g.t(k))));
    }
    MatrixPath p(g, s, d);
    for (double t : {0.1, 0.33, 0.6, 0.97}) CHECK(p(t)(0, 0) == doctest::Approx(f(t)).epsilon(1e-13));
}

TEST_CASE("constant path ignores time") {
    MatrixPath p = MatrixPath::constant(make_grid(1.0, 5), Mat::Identity(2, 2));
    CHECK(p.is_constant());
    CHECK(p(0.37).isApprox(Mat::Identity(2, 2)));
}

TEST_CASE("validation of shipped instances") {
    CHECK(validate_spec(scalar_spec(production_style(), 50)).ok());
    CHECK(validate_spec(homogeneous_game(2, 1.0, 50)).ok());
}

TEST_CASE("validation flags asymmetric Q and indefinite R0") {
    GameSpec s = homogeneous_game(2, 1.0, 10);
    Mat q(2, 2);
    q << 1, 2, 0, 1;
    s.Q = MatrixPath::constant(s.grid, q);
    s.R0 = MatrixPath::constant(s.grid, -Mat::Identity(2, 2));
    ValidationReport r = validate_spec(s);
    CHECK_FALSE(r.ok());
    CHECK(r.summary().find("FAIL symmetric Q") != std::string::npos);
    CHECK(r.summary().find("FAIL positive R0") != std::string::npos);
}

TEST_CASE("validation flags wrong shapes") {
    GameSpec s = homogeneous_game(2, 1.0, 10);
    s.B1 = MatrixPath::constant(s.grid, Mat::Ones(3, 1));
    CHECK(validate_spec(s).summary().find("FAIL shape B1") != std::string::npos);
}

TEST_CASE("dump and parse round trip") {
    GameSpec s = scalar_spec(production_style(), 40);
    GameSpec r = parse_spec(dump_spec(s));
    CHECK(r.grid.N == 40);
    CHECK(r.alpha == s.alpha);
    CHECK(r.gamma == s.gamma);
    CHECK(r.xi == s.xi);
    CHECK(r.G == s.G);
    for (double t : {0.0, 0.41, 1.0}) {
        Coeffs a = coeffs_at(s, t), b = coeffs_at(r, t);
        CHECK(a.A == b.A);
        CHECK(a.D2 == b.D2);
        CHECK(a.sigma == b.sigma);
        CHECK(a.R1 == b.R1);
        CHECK(a.R0hat == b.R0hat);
    }
    CHECK(parse_spec(dump_spec(s), 7).grid.N == 7);
}

TEST_CASE("malformed JSON reports a location") {
    std::string bad = "{\n  \"n\": 1,\n  \"m1\": [\n";
    try {
        parse_spec(bad);
        FAIL("no exception");
    } catch (const SpecError& e) {
        std::string m = e.what();
        CHECK(m.find("malformed JSON") != std::string::npos);
        CHECK(m.find("line") != std::string::npos);
    }
}

TEST_CASE("missing field is a spec error") {
    CHECK_THROWS_AS(parse_spec(R"({"n":1,"m1":1,"m2":1,"T":1})"), SpecError);
}

TEST_CASE("regrid keeps constant coefficients") {
    GameSpec s = scalar_spec(mild_instance(), 10);
    GameSpec r = regrid(s, 33);
    CHECK(r.grid.N == 33);
    CHECK(coeffs_at(r, 0.5).A == coeffs_at(s, 0.5).A);
}
