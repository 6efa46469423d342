#include "rsg/montecarlo.hpp"

namespace rsg {

namespace {

// linear system dz = (Az + a)dt + (Cz + c)dW, z(0) = 0, and the running
// weight w'Ww with w = Tz z + t0
struct Local {
    Mat A, C, Tz, W;
    Vec a, c, t0;
};

// E of the quadratic functional through the first two moments
double moment_functional(int dim, const std::function<Local(double)>& at, const Mat& Gterm, const TimeGrid& g) {
    // state columns: second moment (dim), mean (1), running cost (1, row 0)
    auto rhs = [&](double t, const Mat& S) -> Mat {
        Local L = at(t);
        Mat Sig = S.leftCols(dim);
        Vec m = S.col(dim);
        Mat out = Mat::Zero(dim, dim + 2);
        Mat Cm = L.C * m;
        Mat cross = Cm * L.c.transpose() + L.a * m.transpose();
        out.leftCols(dim) = L.A * Sig + Sig * L.A.transpose() + L.C * Sig * L.C.transpose() + cross +
                            cross.transpose() + L.c * L.c.transpose();
        out.col(dim) = L.A * m + L.a;
        Mat TWT = L.Tz.transpose() * L.W * L.Tz;
        double run = (TWT * Sig).trace() + 2.0 * L.t0.dot(L.W * L.Tz * m) + L.t0.dot(L.W * L.t0);
        out(0, dim + 1) = run;
        return out;
    };
    MatrixPath S = integrate_forward(rhs, Mat::Zero(dim, dim + 2), g, "convexity");
    const Mat& ST = S.node(g.N);
    return ST(0, dim + 1) + (Gterm * ST.leftCols(dim)).trace();
}

Mat diag_blocks(const std::vector<Mat>& b) {
    int r = 0;
    for (const Mat& m : b) r += static_cast<int>(m.rows());
    Mat out = Mat::Zero(r, r);
    int o = 0;
    for (const Mat& m : b) {
        out.block(o, o, m.rows(), m.cols()) = m;
        o += static_cast<int>(m.rows());
    }
    return out;
}

Local first_order(const Coeffs& c, const Vec& h, const Mat& Wz, const Mat& Wh) {
    const int n = static_cast<int>(c.A.rows());
    Local L;
    L.A = c.A;
    L.C = c.C;
    L.a = h;
    L.c = Vec::Zero(n);
    L.Tz = Mat::Zero(2 * n, n);
    L.Tz.topRows(n) = Mat::Identity(n, n);
    L.t0 = Vec::Zero(2 * n);
    L.t0.tail(n) = h;
    L.W = diag_blocks({Wz, Wh});
    return L;
}

}  // namespace

double J1p(const GameSpec& s, const Direction& h) {
    auto at = [&](double t) {
        Coeffs c = coeffs_at(s, t);
        return first_order(c, h(t), -c.Q, 0.5 * s.alpha * c.R0);
    };
    return moment_functional(s.n, at, -s.G, s.grid);
}

double J2p(const GameSpec& s, const Direction& g) {
    auto at = [&](double t) {
        Coeffs c = coeffs_at(s, t);
        return first_order(c, g(t), c.Q, 0.5 * s.gamma * c.R0hat);
    };
    return moment_functional(s.n, at, s.G, s.grid);
}

double J1pp(const GameSpec& s, const MatrixPath& P1, const Direction& v) {
    const int n = s.n, m1 = s.m1;
    const double a2 = 2.0 / s.alpha;
    auto vfn = [&](double t) { return Mat(v(t)); };
    MatrixPath phi =
        solve_offset_R1(s, P1, vfn, [&](double) { return Mat::Zero(s.m2, 1).eval(); }, false).phi;
    auto at = [&](double t) {
        Coeffs c = coeffs_at(s, t);
        Mat p1 = P1(t), R0i = c.R0.inverse();
        Vec vt = v(t), ph = phi(t);
        Local L;
        // p = P1 z + phi closes the forward equation
        L.A = c.A - a2 * R0i * p1;
        L.a = c.B1 * vt - a2 * R0i * ph;
        L.C = c.C;
        L.c = c.D1 * vt;
        L.Tz = Mat::Zero(2 * n + m1, n);
        L.Tz.topRows(n) = Mat::Identity(n, n);
        L.Tz.middleRows(n, n) = p1;
        L.t0 = Vec::Zero(2 * n + m1);
        L.t0.segment(n, n) = ph;
        L.t0.tail(m1) = vt;
        L.W = diag_blocks({c.Q, -a2 * R0i, c.R1});
        return L;
    };
    return moment_functional(n, at, s.G, s.grid);
}

double J2pp(const GameSpec& s, const MatrixPath& P, const MatrixPath& P3, const Direction& v, double delta) {
    const int n5 = 5 * s.n, m2 = s.m2;
    RiccatiProblem r3 = r3_problem(s, P, delta);
    auto vfn = [&](double t) { return Mat(v(t)); };
    MatrixPath phi = solve_offset(r3, P3, [&](double t) {
                         StagePack st = build_stages(s, t, P(t), delta);
                         Mat vt = vfn(t);
                         return OffsetSources{st.bb.B2 * vt, st.bb.D2 * vt, st.bb.F2 * vt};
                     }).phi;
    auto at = [&](double t) {
        StagePack st = build_stages(s, t, P(t), delta);
        const BlackboardBlocks& b = st.bb;
        const LeaderCostWeights& w = st.w;
        Mat p3 = P3(t);
        Vec vt = v(t), ph = phi(t);
        Mat Wi = (Mat::Identity(n5, n5) - p3 * b.D3).inverse();
        // y = P3 z + phi, Z = K z + k
        Mat K = Wi * (p3 * b.C + p3 * b.D1 * p3);
        Vec k = Wi * (p3 * b.D1 * ph + p3 * b.D2 * vt);
        Local L;
        L.A = b.A + b.B1 * p3 + b.B3 * K;
        L.a = b.B1 * ph + b.B3 * k + b.B2 * vt;
        L.C = b.C + b.D1 * p3 + b.D3 * K;
        L.c = b.D1 * ph + b.D3 * k + b.D2 * vt;
        const int dw = 3 * n5 + m2;
        L.Tz = Mat::Zero(dw, n5);
        L.Tz.topRows(n5) = Mat::Identity(n5, n5);
        L.Tz.middleRows(n5, n5) = p3;
        L.Tz.middleRows(2 * n5, n5) = K;
        L.t0 = Vec::Zero(dw);
        L.t0.segment(n5, n5) = ph;
        L.t0.segment(2 * n5, n5) = k;
        L.t0.tail(m2) = vt;
        // order z, y, Z, v
        Mat W = Mat::Zero(dw, dw);
        W.block(0, 0, n5, n5) = w.Qbb;
        W.block(n5, n5, n5, n5) = w.Bbb;
        W.block(2 * n5, 2 * n5, n5, n5) = w.Dbb;
        W.block(3 * n5, 3 * n5, m2, m2) = w.RR;
        W.block(n5, 0, n5, n5) = w.S1;
        W.block(2 * n5, 0, n5, n5) = w.L1;
        W.block(2 * n5, n5, n5, n5) = w.M1;
        W.block(3 * n5, 0, m2, n5) = w.S2;
        W.block(3 * n5, n5, m2, n5) = w.M2;
        W.block(3 * n5, 2 * n5, m2, n5) = w.L2;
        for (int i = 0; i < dw; ++i)
            for (int j = i + 1; j < dw; ++j) W(i, j) = W(j, i);
        L.W = -W;
        return L;
    };
    StagePack stT = build_stages(s, s.grid.T, P.node(s.grid.N), delta, s.grid.N);
    return moment_functional(n5, at, -stT.w.Gbb, s.grid);
}

PerturbationReport sampled_convexity(const GameSpec& s, const MatrixPath& P, const MatrixPath& P1,
                                     const MatrixPath& P3, int samples, std::uint64_t seed, double delta) {
    PerturbationReport rep;
    const double T = s.grid.T;
    for (int j = 0; j < samples; ++j) {
        std::mt19937_64 rng = path_rng(seed ^ 0xbb67ae8584caa73bULL, static_cast<std::uint64_t>(j));
        Direction h = Direction::random(s.n, T, 8, rng);
        Direction g = Direction::random(s.n, T, 8, rng);
        Direction v1 = Direction::random(s.m1, T, 8, rng);
        Direction v2 = Direction::random(s.m2, T, 8, rng);
        const std::pair<const char*, double> vals[] = {{"J1p", J1p(s, h)},
                                                       {"J2p", J2p(s, g)},
                                                       {"J1pp", J1pp(s, P1, v1)},
                                                       {"J2pp", J2pp(s, P, P3, v2, delta)}};
        for (const auto& [name, val] : vals) rep.rows.push_back({name, j, 1.0, val, 0.0, val > 0.0 ? "pass" : "fail"});
    }
    return rep;
}

}  // namespace rsg
