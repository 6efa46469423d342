#include "rsg/equilibrium.hpp"

namespace rsg {

StagePack EquilibriumSolution::stages_at(double t, int node) const {
    return build_stages(spec, t, P.P(t), delta, node);
}

GainPoint EquilibriumSolution::gains_at(double t, int node) const {
    StagePack st = stages_at(t, node);
    return build_gain_maps(spec, coeffs_at(spec, t), P.P(t), Phat.P(t), st, phihat(t), delta, node);
}

ClosedLoop EquilibriumSolution::closed_loop_at(double t, const StagePack& st, const GainPoint& g) const {
    const DoubleHatBlocks& d = st.dh;
    Mat Ph = Phat.P(t), ph = phihat(t);
    ClosedLoop cl;
    cl.At = d.A1 + d.B1 * Ph + d.B2 * g.Zc;
    cl.Bt = d.B1 * ph + d.B2 * g.Zo + d.F;
    cl.Ct = d.C1 + d.D1 * Ph + d.D2 * g.Zc;
    cl.Dt = d.D1 * ph + d.D2 * g.Zo + d.Sigma;
    return cl;
}

ClosedLoop EquilibriumSolution::closed_loop_at(double t) const {
    StagePack st = stages_at(t);
    GainPoint g = build_gain_maps(spec, coeffs_at(spec, t), P.P(t), Phat.P(t), st, phihat(t), delta);
    return closed_loop_at(t, st, g);
}

namespace {

RiccatiProblem make_problem(const GameSpec& s, const MatrixPath& P, double delta, const char* stage,
                            std::function<RiccatiCoefficients(const StagePack&)> pick,
                            std::function<Mat(const StagePack&)> term) {
    RiccatiProblem p;
    p.grid = s.grid;
    p.stage = stage;
    p.coef = [&s, P, delta, pick](double t) { return pick(build_stages(s, t, P(t), delta)); };
    StagePack stT = build_stages(s, s.grid.T, P.node(P.grid().N), delta, s.grid.N);
    p.Pterm = term(stT);
    p.d = p.Pterm.rows();
    return p;
}

}  // namespace

RiccatiProblem r2_problem(const GameSpec& s, const MatrixPath& P, double delta) {
    return make_problem(
        s, P, delta, "(R-2)",
        [](const StagePack& st) {
            const HatBlocks& h = st.hat;
            return RiccatiCoefficients{h.A1, h.A2, h.B1, h.Q, true, h.C, h.C, h.B3, h.D1, h.D3};
        },
        [](const StagePack& st) { return st.hat.G; });
}

RiccatiProblem r3_problem(const GameSpec& s, const MatrixPath& P, double delta) {
    return make_problem(
        s, P, delta, "(R-3)",
        [](const StagePack& st) {
            const BlackboardBlocks& b = st.bb;
            return RiccatiCoefficients{b.A, b.A, b.B1, b.Q, true, b.C, b.C, b.B3, b.D1, b.D3};
        },
        [](const StagePack& st) { return st.bb.G; });
}

RiccatiProblem r4_problem(const GameSpec& s, const MatrixPath& P, double delta) {
    return make_problem(
        s, P, delta, "(R-4)",
        [](const StagePack& st) {
            const DoubleHatBlocks& d = st.dh;
            return RiccatiCoefficients{d.A1, d.A2, d.B1, d.Q, true, d.C1, d.C2, d.B2, d.D1, d.D2};
        },
        [](const StagePack& st) { return st.dh.G; });
}

RiccatiProblem r4_skeleton_problem(const GameSpec& s, const MatrixPath& P, double delta) {
    return make_problem(
        s, P, delta, "(R-4) skeleton",
        [](const StagePack& st) {
            const DoubleHatBlocks& d = st.dh;
            RiccatiCoefficients c;
            c.A1 = d.A1;
            c.A2 = d.A2;
            c.B1 = d.B1;
            c.Q = d.Q;
            return c;
        },
        [](const StagePack& st) { return st.dh.G; });
}

EquilibriumSolution solve_game(const GameSpec& spec, double delta, bool diagnostics) {
    ValidationReport rep = validate_spec(spec, delta);
    if (!rep.ok()) throw SpecError("spec validation failed:\n" + rep.summary());
    EquilibriumSolution sol;
    sol.spec = spec;
    sol.delta = delta;
    const GameSpec& s = sol.spec;
    const TimeGrid& g = s.grid;
    const int n = s.n;

    sol.P = solve_riccati_follower(s, delta);
    sol.P1 = solve_riccati_R1(s);
    for (int k = 0; k <= g.N; ++k) build_stages(s, g.t(k), sol.P.P.node(k), delta, k);

    RiccatiProblem r4 = r4_problem(s, sol.P.P, delta);
    sol.Phat = solve_riccati_generalized(r4, delta);
    sol.phihat = solve_offset(r4, sol.Phat.P, [&](double t) {
                     StagePack st = build_stages(s, t, sol.P.P(t), delta);
                     return OffsetSources{st.dh.F, st.dh.Sigma, st.dh.Ups};
                 }).phi;

    if (diagnostics) {
        sol.P2 = solve_riccati_generalized(r2_problem(s, sol.P.P, delta), delta);
        sol.P3 = solve_riccati_generalized(r3_problem(s, sol.P.P, delta), delta);
    }

    // everything below is needed at RK4 half steps too, so cache the last point
    struct Point {
        double t = -1;
        GainPoint g;
        ClosedLoop cl;
        Mat Lsrc, psisrc;
    };
    Point cache;
    const Mat M1 = block_selector(n, 1);
    auto at = [&](double t) -> const Point& {
        if (t == cache.t) return cache;
        Coeffs c = coeffs_at(s, t);
        StagePack st = sol.stages_at(t);
        cache.g = build_gain_maps(s, c, sol.P.P(t), sol.Phat.P(t), st, sol.phihat(t), delta);
        cache.cl = sol.closed_loop_at(t, st, cache.g);
        const GainPoint& gp = cache.g;
        Mat R2w = gp.RRi * c.R2 * gp.RRi;
        cache.Lsrc = M1.transpose() * c.Q * M1 + gp.PM1.transpose() * gp.R * gp.PM1 + gp.PM2.transpose() * R2w * gp.PM2;
        cache.psisrc = gp.PM1.transpose() * gp.R * gp.phiM1 + gp.PM2.transpose() * R2w * gp.phiM2;
        cache.t = t;
        return cache;
    };

    std::vector<Mat> pm1, pm2, fm1, fm2, A, B, C, D;
    for (int k = 0; k <= g.N; ++k) {
        const Point& p = at(g.t(k));
        pm1.push_back(p.g.PM1);
        pm2.push_back(p.g.PM2);
        fm1.push_back(p.g.phiM1);
        fm2.push_back(p.g.phiM2);
        A.push_back(p.cl.At);
        B.push_back(p.cl.Bt);
        C.push_back(p.cl.Ct);
        D.push_back(p.cl.Dt);
    }
    sol.PM1 = MatrixPath(g, pm1);
    sol.PM2 = MatrixPath(g, pm2);
    sol.phiM1 = MatrixPath(g, fm1);
    sol.phiM2 = MatrixPath(g, fm2);
    sol.Atil = MatrixPath(g, A);
    sol.Btil = MatrixPath(g, B);
    sol.Ctil = MatrixPath(g, C);
    sol.Dtil = MatrixPath(g, D);

    sol.L = solve_lyapunov([&](double t) { return at(t).cl.At; }, [&](double t) { return at(t).cl.Ct; },
                           [&](double t) { return at(t).Lsrc; }, M1.transpose() * s.G * M1, g);
    sol.psi = solve_value_offset([&](double t) { return at(t).cl.At; }, [&](double t) { return at(t).cl.Ct; },
                                 [&](double t) { return at(t).cl.Bt; }, [&](double t) { return at(t).cl.Dt; }, sol.L,
                                 [&](double t) { return at(t).psisrc; }, g)
                  .phi;
    return sol;
}

StrategyOutput feedback(const EquilibriumSolution& sol, const Vec& X, double t) {
    GainPoint g = sol.gains_at(t);
    Mat Y = sol.Phat.P(t) * X + sol.phihat(t);
    StrategyOutput o;
    o.u1 = g.Rti * (g.PM1 * X + g.phiM1);
    o.u2 = g.RRi * (g.PM2 * X + g.phiM2);
    o.f = g.Ff * Y;
    o.f2 = g.Ff2 * Y;
    return o;
}

StrategyOutput clamp_nonnegative(const StrategyOutput& s) {
    StrategyOutput o = s;
    o.u1 = s.u1.cwiseMax(0.0);
    o.u2 = s.u2.cwiseMax(0.0);
    return o;
}

double value(const EquilibriumSolution& sol) {
    const GameSpec& s = sol.spec;
    const TimeGrid& g = s.grid;
    std::vector<double> f(g.N + 1);
    for (int k = 0; k <= g.N; ++k) {
        double t = g.t(k);
        Coeffs c = coeffs_at(s, t);
        StagePack st = sol.stages_at(t, k);
        const Mat& R = st.w.R;
        const Mat& RRi = st.w.RRi;
        const Mat& a = sol.phiM1.node(k);
        const Mat& b = sol.phiM2.node(k);
        const Mat& D = sol.Dtil.node(k);
        Mat v = a.transpose() * R * a + b.transpose() * RRi * c.R2 * RRi * b + D.transpose() * sol.L.node(k) * D +
                2.0 * sol.Btil.node(k).transpose() * sol.psi.node(k);
        f[k] = v(0, 0);
    }
    double integ = 0.0;
    for (int k = 0; k < g.N; ++k) integ += 0.5 * g.dt() * (f[k] + f[k + 1]);
    Mat Xi = sol.stages_at(0.0, 0).dh.Xi;
    Mat bnd = Xi.transpose() * sol.L.node(0) * Xi + 2.0 * Xi.transpose() * sol.psi.node(0);
    return integ + bnd(0, 0);
}

MatrixPath scalar_bode(double a, double c, double q, double g, double r1, double T, int N, double delta) {
    TimeGrid grid = make_grid(T, N);
    const double lin = 2.0 * (1.0 - a) + c * c, cc = (1.0 + c) * (1.0 + c);
    auto rhs = [=](double, const Mat& P) -> Mat {
        double p = P(0, 0);
        Mat r(1, 1);
        r(0, 0) = -(lin * p - p * p * cc / (r1 + p) + q);
        return r;
    };
    Mat term(1, 1);
    term(0, 0) = g;
    MatrixPath P = integrate_backward(rhs, term, grid, "(bode)");
    for (int k = 0; k <= N; ++k)
        if (!(r1 + P.node(k)(0, 0) >= delta)) throw SolverError("(bode)", k, "r1 + P not uniformly positive");
    return P;
}

}  // namespace rsg
