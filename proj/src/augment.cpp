#include "rsg/augment.hpp"

namespace rsg {

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::hat: return "hat";
        case Stage::check: return "check";
        case Stage::blackboard: return "blackboard";
        case Stage::doublehat: return "doublehat";
    }
    return "?";
}

Stage parse_stage(const std::string& s) {
    if (s == "hat") return Stage::hat;
    if (s == "check") return Stage::check;
    if (s == "blackboard") return Stage::blackboard;
    if (s == "doublehat") return Stage::doublehat;
    throw SpecError("unknown stage '" + s + "' (hat|check|blackboard|doublehat)");
}

NamedBlocks HatBlocks::named() const {
    return {{"A1", A1}, {"A2", A2}, {"C", C},   {"B1", B1},       {"B2", B2}, {"B3", B3},
            {"D1", D1}, {"D2", D2}, {"D3", D3}, {"b", b},         {"sigma", sigma},
            {"v", v},   {"F", F},   {"Q", Q},   {"G", G},         {"xi", xi}};
}

NamedBlocks CheckBlocks::named() const {
    return {{"A", A},   {"C", C},       {"B1", B1}, {"B2", B2}, {"B3", B3},     {"D1", D1},
            {"D2", D2}, {"D3", D3},     {"F1", F1}, {"sigma", sigma}, {"Q", Q}, {"G", G},
            {"Qbar", Qbar}, {"Gbar", Gbar}, {"I", I}, {"xi", xi}};
}

NamedBlocks BlackboardBlocks::named() const {
    return {{"A", A},   {"C", C},   {"B1", B1}, {"B2", B2},       {"B3", B3}, {"D1", D1},
            {"D2", D2}, {"D3", D3}, {"F1", F1}, {"F2", F2},       {"Sigma", Sigma},
            {"Xi", Xi}, {"Ups", Ups}, {"Q", Q}, {"G", G}};
}

NamedBlocks LeaderCostWeights::named() const {
    return {{"R", R},   {"RR", RR}, {"Qbb", Qbb}, {"Bbb", Bbb}, {"Dbb", Dbb}, {"Gbb", Gbb},
            {"S1", S1}, {"S2", S2}, {"S3", S3},   {"M1", M1},   {"M2", M2},   {"M3", M3},
            {"L1", L1}, {"L2", L2}, {"L3", L3},   {"rho", rho}};
}

NamedBlocks DoubleHatBlocks::named() const {
    return {{"A1", A1}, {"A2", A2}, {"C1", C1}, {"C2", C2},       {"B1", B1}, {"B2", B2},
            {"D1", D1}, {"D2", D2}, {"Q", Q},   {"F", F},         {"Sigma", Sigma},
            {"Ups", Ups}, {"Xi", Xi}, {"G", G}};
}

namespace {

Mat Z(int r, int c) { return Mat::Zero(r, c); }

Mat inv(const Mat& m) { return m.partialPivLu().inverse(); }

Mat stack(const Mat& a, const Mat& b) {
    Mat m(a.rows() + b.rows(), a.cols());
    m << a, b;
    return m;
}

Mat stack(const Mat& a, const Mat& b, const Mat& c) {
    Mat m(a.rows() + b.rows() + c.rows(), a.cols());
    m << a, b, c;
    return m;
}

Mat b22(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
    Mat m(a.rows() + c.rows(), a.cols() + b.cols());
    m << a, b, c, d;
    return m;
}

Mat b33(const Mat& a, const Mat& b, const Mat& c, const Mat& d, const Mat& e, const Mat& f, const Mat& g,
        const Mat& h, const Mat& i) {
    Mat m(a.rows() + d.rows() + g.rows(), a.cols() + b.cols() + c.cols());
    m << a, b, c, d, e, f, g, h, i;
    return m;
}

// n-blocks of a 5n square or a k x 5n row
struct Blk5 {
    int n;
    Mat m;
    Blk5(int n_, int rows) : n(n_), m(Mat::Zero(rows, 5 * n_)) {}
    Blk5& at(int i, int j, const Mat& v) {
        m.block((i - 1) * n, (j - 1) * n, v.rows(), v.cols()) = v;
        return *this;
    }
    Blk5& col(int j, const Mat& v) {
        m.block(0, (j - 1) * n, v.rows(), v.cols()) = v;
        return *this;
    }
};

struct Follower {
    Mat S, Rt, Rti, K;
};

Follower follower_terms(const Coeffs& c, const Mat& P, double delta, int node, const char* stage) {
    Follower f;
    f.S = P * c.B1 + c.C.transpose() * P * c.D1;
    f.Rt = c.R1 + c.D1.transpose() * P * c.D1;
    double e = min_eig_sym(f.Rt);
    if (!(e >= delta))
        throw SolverError(stage, node, "R1 + D1'PD1 not uniformly positive (min eigenvalue " + std::to_string(e) + ")");
    f.Rti = inv(f.Rt);
    f.K = f.Rti * f.S.transpose();
    return f;
}

}  // namespace

HatBlocks build_hat(const GameSpec& s, const Coeffs& c, const Mat& P, double delta, int node) {
    const int n = s.n, m2 = s.m2;
    const Mat I = Mat::Identity(n, n), O = Z(n, n);
    Follower fo = follower_terms(c, P, delta, node, "hat");
    const Mat& Rti = fo.Rti;
    const double a2 = 2.0 / s.alpha;
    const Mat R0i = inv(c.R0);
    const Mat B1t = c.B1.transpose(), D1t = c.D1.transpose();
    HatBlocks h;
    Mat AK = c.A - c.B1 * fo.K;
    h.A1 = b22(AK, O, -a2 * R0i * P, c.A);
    h.A2 = b22(AK, O, a2 * R0i * P, c.A);
    h.C = b22(c.C - c.D1 * fo.K, O, O, c.C);
    h.B1 = b22(c.B1 * Rti * B1t, -a2 * R0i, a2 * R0i, -a2 * R0i);
    h.B3 = b22(c.B1 * Rti * D1t, O, O, O);
    Mat b2 = c.B2 - c.B1 * Rti * D1t * P * c.D2;
    Mat d2 = c.D2 - c.D1 * Rti * D1t * P * c.D2;
    h.B2 = stack(b2, Z(n, m2));
    h.D1 = b22(c.D1 * Rti * B1t, O, O, O);
    h.D3 = b22(c.D1 * Rti * D1t, O, O, O);
    h.D2 = stack(d2, Z(n, m2));
    h.b = stack(-c.B1 * Rti * D1t * P * c.sigma, Z(n, 1));
    h.sigma = stack((I - c.D1 * Rti * D1t * P) * c.sigma, Z(n, 1));
    // the feedback part of the follower control also carries the sigma offset
    h.v = stack(c.C.transpose() * P * c.sigma - fo.S * Rti * D1t * P * c.sigma, Z(n, 1));
    h.F = stack(-fo.S * Rti * D1t * P * c.D2 + P * c.B2 + c.C.transpose() * P * c.D2, Z(n, m2));
    h.Q = b22(O, -c.Q, c.Q, O);
    h.G = b22(O, s.G, -s.G, O);
    h.xi = stack(s.xi, s.xi);
    return h;
}

CheckBlocks build_check(const GameSpec& s, const Coeffs& c, const Mat& P, double delta, int node) {
    const int n = s.n, m2 = s.m2;
    const Mat I = Mat::Identity(n, n), O = Z(n, n);
    Follower fo = follower_terms(c, P, delta, node, "check");
    const Mat& Rti = fo.Rti;
    const double a2 = 2.0 / s.alpha;
    const Mat R0i = inv(c.R0);
    const Mat B1t = c.B1.transpose(), D1t = c.D1.transpose();
    const Mat BK = c.B1 * fo.K, DK = c.D1 * fo.K;
    const Mat BRB = c.B1 * Rti * B1t, BRD = c.B1 * Rti * D1t, DRB = c.D1 * Rti * B1t, DRD = c.D1 * Rti * D1t;
    CheckBlocks k;
    k.A = b33(c.A, -BK, O, O, c.A - BK, O, O, -a2 * R0i * P, c.A);
    k.C = b33(c.C, -DK, O, O, c.C - DK, O, O, O, c.C);
    k.B1 = stack(b22(BRB, O, BRB, -a2 * R0i), (Mat(n, 2 * n) << a2 * R0i, -a2 * R0i).finished());
    k.B3 = stack(b22(BRD, O, BRD, O), Z(n, 2 * n));
    k.D1 = stack(b22(DRB, O, DRB, O), Z(n, 2 * n));
    k.D3 = stack(b22(DRD, O, DRD, O), Z(n, 2 * n));
    Mat b2 = c.B2 - BRD * P * c.D2;
    Mat d2 = c.D2 - DRD * P * c.D2;
    k.B2 = stack(b2, b2, Z(n, m2));
    k.D2 = stack(d2, d2, Z(n, m2));
    Mat bs = BRD * P * c.sigma;
    k.F1 = stack(c.f1 - bs, -bs, Z(n, 1));
    Mat sh = (I - DRD * P) * c.sigma;
    k.sigma = stack(sh, sh, Z(n, 1));
    k.Q = (Mat(2 * n, 3 * n) << O, O, -c.Q, O, c.Q, O).finished();
    k.G = (Mat(2 * n, 3 * n) << O, O, s.G, O, -s.G, O).finished();
    k.Qbar = b33(c.Q, O, O, O, O, O, O, O, O);
    k.Gbar = b33(s.G, O, O, O, O, O, O, O, O);
    k.I = stack(I, O, O);
    k.xi = stack(s.xi, s.xi, Z(n, 1));
    return k;
}

BlackboardBlocks build_blackboard(const CheckBlocks& k, const HatBlocks& h, double gamma, const Mat& R0hat) {
    const int n = k.I.cols();
    if (k.A.rows() != 3 * n || h.A1.rows() != 2 * n) throw std::invalid_argument("blackboard: stage dimension mismatch");
    const int m2 = k.B2.cols();
    const Mat Z32 = Z(3 * n, 2 * n), Z23 = Z(2 * n, 3 * n), Z33 = Z(3 * n, 3 * n), Z22 = Z(2 * n, 2 * n);
    const Mat Rhi = inv(R0hat);
    BlackboardBlocks b;
    b.A = b22(k.A, Z32, Z23, h.A2);
    b.C = b22(k.C, Z32, Z23, h.C);
    b.B1 = b22((2.0 / gamma) * k.I * Rhi * k.I.transpose(), k.B1, -k.B1.transpose(), Z22);
    b.B3 = b22(Z33, k.B3, -k.D1.transpose(), Z22);
    b.D1 = b22(Z33, k.D1, -k.B3.transpose(), Z22);
    b.D3 = b22(Z33, k.D3, -k.D3.transpose(), Z22);
    b.Q = b22(k.Qbar, -k.Q.transpose(), k.Q, Z22);
    b.G = b22(-k.Gbar, -k.G.transpose(), k.G, Z22);
    b.B2 = stack(k.B2, Z(2 * n, m2));
    b.D2 = stack(k.D2, Z(2 * n, m2));
    b.F1 = stack(k.F1, Z(2 * n, 1));
    b.F2 = stack(Z(3 * n, m2), h.F);
    b.Sigma = stack(k.sigma, Z(2 * n, 1));
    b.Xi = stack(k.xi, Z(2 * n, 1));
    b.Ups = stack(Z(3 * n, 1), h.v);
    return b;
}

LeaderCostWeights build_cost_weights(const GameSpec& s, const Coeffs& c, const Mat& P, double delta, int node) {
    const int n = s.n, m2 = s.m2;
    Follower fo = follower_terms(c, P, delta, node, "cost weights");
    LeaderCostWeights w;
    w.Rt = fo.Rt;
    w.Rti = fo.Rti;
    w.S = fo.S;
    w.R = fo.Rti * c.R1 * fo.Rti;
    const Mat B1t = c.B1.transpose(), D1t = c.D1.transpose(), St = fo.S.transpose();
    const Mat D2PD1 = c.D2.transpose() * P * c.D1;
    w.RR = c.R2 + D2PD1 * w.R * D1t * P * c.D2;
    w.RR = 0.5 * (w.RR + w.RR.transpose());
    double e = max_eig_sym(w.RR);
    if (!(e <= -delta))
        throw SolverError("cost weights", node, "leader weight not uniformly negative (max eigenvalue " + std::to_string(e) + ")");
    w.RRi = inv(w.RR);
    const Mat& R = w.R;
    w.Qbb = Blk5(n, 5 * n).at(1, 1, c.Q).at(2, 2, fo.S * R * St).m;
    w.Bbb = Blk5(n, 5 * n).at(1, 1, (2.0 / s.gamma) * inv(c.R0hat)).at(4, 4, c.B1 * R * B1t).m;
    w.Dbb = Blk5(n, 5 * n).at(4, 4, c.D1 * R * D1t).m;
    w.Gbb = Blk5(n, 5 * n).at(1, 1, s.G).m;
    w.S1 = Blk5(n, 5 * n).at(4, 2, -c.B1 * R * St).m;
    w.M1 = Blk5(n, 5 * n).at(4, 4, c.D1 * R * B1t).m;
    w.L1 = Blk5(n, 5 * n).at(4, 2, -c.D1 * R * St).m;
    w.S2 = Blk5(n, m2).col(2, D2PD1 * R * St).m;
    w.M2 = Blk5(n, m2).col(4, -D2PD1 * R * B1t).m;
    w.L2 = Blk5(n, m2).col(4, -D2PD1 * R * D1t).m;
    w.S3 = Blk5(n, n).col(2, P * c.D1 * R * St).m;
    w.M3 = Blk5(n, n).col(4, -P * c.D1 * R * B1t).m;
    w.L3 = Blk5(n, n).col(4, -P * c.D1 * R * D1t).m;
    w.rho = D2PD1 * R * D1t * P * c.sigma;
    return w;
}

DoubleHatBlocks build_doublehat(const BlackboardBlocks& b, const LeaderCostWeights& w, const Mat& sigma, int node) {
    const int d = b.A.rows();
    Eigen::PartialPivLU<Mat> lu(w.RR);
    if (!(std::abs(lu.determinant()) > 0.0)) throw SolverError("doublehat", node, "singular leader weight");
    const Mat& RRi = w.RRi;
    const Mat F2t = b.F2.transpose();
    const Mat& S2 = w.S2;
    const Mat& M2 = w.M2;
    const Mat& L2 = w.L2;
    const Mat M2t = M2.transpose(), L2t = L2.transpose(), S2t = S2.transpose();
    DoubleHatBlocks h;
    h.A1 = b22(b.A - b.B2 * RRi * S2, b.B2 * RRi * F2t, w.S1 - M2t * RRi * S2, b.A + M2t * RRi * F2t);
    h.A2 = b22(b.A - b.B2 * RRi * S2, -b.B2 * RRi * F2t, -w.S1 + M2t * RRi * S2, b.A + M2t * RRi * F2t);
    h.C1 = b22(b.C - b.D2 * RRi * S2, b.D2 * RRi * F2t, w.L1 - L2t * RRi * S2, b.C + L2t * RRi * F2t);
    h.C2 = b22(b.C - b.D2 * RRi * S2, -b.D2 * RRi * F2t, -w.L1 + L2t * RRi * S2, b.C + L2t * RRi * F2t);
    h.B1 = b22(b.B2 * RRi * b.B2.transpose(), b.B1 - b.B2 * RRi * M2, -b.B1.transpose() + M2t * RRi * b.B2.transpose(),
               w.Bbb - M2t * RRi * M2);
    h.B2 = b22(b.B2 * RRi * b.D2.transpose(), b.B3 - b.B2 * RRi * L2, -b.D1.transpose() + M2t * RRi * b.D2.transpose(),
               w.M1.transpose() - M2t * RRi * L2);
    h.D1 = b22(b.D2 * RRi * b.B2.transpose(), b.D1 - b.D2 * RRi * M2, -b.B3.transpose() + L2t * RRi * b.B2.transpose(),
               w.M1 - L2t * RRi * M2);
    h.D2 = b22(b.D2 * RRi * b.D2.transpose(), b.D3 - b.D2 * RRi * L2, -b.D3.transpose() + L2t * RRi * b.D2.transpose(),
               w.Dbb.transpose() - L2t * RRi * L2);
    h.Q = b22(w.Qbb - S2t * RRi * S2, -b.Q.transpose() + S2t * RRi * F2t, b.Q - b.F2 * RRi * S2, b.F2 * RRi * F2t);
    const Mat& rho = w.rho;
    h.F = stack(b.F1 - b.B2 * RRi * rho, w.M3.transpose() * sigma - M2t * RRi * rho);
    h.Sigma = stack(b.Sigma - b.D2 * RRi * rho, w.L3.transpose() * sigma - L2t * RRi * rho);
    h.Ups = stack(w.S3.transpose() * sigma - S2t * RRi * rho, b.Ups - b.F2 * RRi * rho);
    h.Xi = stack(b.Xi, Z(d, 1));
    h.G = b22(-w.Gbb, -b.G.transpose(), b.G, Z(d, d));
    return h;
}

StagePack build_stages(const GameSpec& s, double t, const Mat& P, double delta, int node) {
    Coeffs c = coeffs_at(s, t);
    StagePack st;
    st.hat = build_hat(s, c, P, delta, node);
    st.check = build_check(s, c, P, delta, node);
    st.bb = build_blackboard(st.check, st.hat, s.gamma, c.R0hat);
    st.w = build_cost_weights(s, c, P, delta, node);
    st.dh = build_doublehat(st.bb, st.w, c.sigma, node);
    return st;
}

StageCoefficients stage_paths(const GameSpec& s, const MatrixPath& P, Stage tag, double delta) {
    const TimeGrid& g = P.grid();
    std::map<std::string, std::vector<Mat>> acc;
    for (int k = 0; k <= g.N; ++k) {
        StagePack st = build_stages(s, g.t(k), P.node(k), delta, k);
        NamedBlocks nb;
        switch (tag) {
            case Stage::hat: nb = st.hat.named(); break;
            case Stage::check: nb = st.check.named(); break;
            case Stage::blackboard: nb = st.bb.named(); break;
            case Stage::doublehat: nb = st.dh.named(); break;
        }
        for (auto& [name, m] : nb) acc[name].push_back(m);
    }
    StageCoefficients out{tag, {}};
    for (auto& [name, v] : acc) out.blocks.emplace(name, MatrixPath(g, v));
    return out;
}

Mat block_selector(int n, int i, int nblocks) {
    Mat M = Mat::Zero(n, nblocks * n);
    M.block(0, (i - 1) * n, n, n).setIdentity();
    return M;
}

SelectorSet selectors(int n) {
    SelectorSet s;
    s.M1 = block_selector(n, 1);
    s.M2 = block_selector(n, 2);
    s.M3 = s.M1 + s.M2;
    s.M4 = block_selector(n, 6);
    s.M5 = block_selector(n, 7);
    s.M6 = block_selector(n, 8);
    s.M7 = block_selector(n, 9);
    return s;
}

GainPoint build_gain_maps(const GameSpec& s, const Coeffs& c, const Mat& P, const Mat& Phat, const StagePack& st,
                          const Mat& phihat, double delta, int node) {
    const int n = s.n, d = 10 * n;
    const DoubleHatBlocks& dh = st.dh;
    const LeaderCostWeights& w = st.w;
    GainPoint g;
    Mat IPD = Mat::Identity(d, d) - Phat * dh.D2;
    Eigen::JacobiSVD<Mat> svd(IPD);
    double smin = svd.singularValues().minCoeff();
    if (!(smin >= delta)) throw SolverError("gain maps", node, "I - Phat*D2 near singular (" + std::to_string(smin) + ")");
    g.W = IPD.partialPivLu().inverse();
    g.Zc = g.W * (Phat * dh.C1 + Phat * dh.D1 * Phat);
    g.Zo = g.W * (Phat * dh.D1 * phihat + Phat * dh.Sigma);

    SelectorSet sel = selectors(n);
    const Mat Myb = block_selector(n, comp::ybar);
    const Mat Mpb = block_selector(n, comp::pbar);
    const Mat Mxt = block_selector(n, comp::xtilde);
    const Mat B1t = c.B1.transpose(), D1t = c.D1.transpose(), D2t = c.D2.transpose(), St = w.S.transpose();
    const Mat& Rti = w.Rti;
    const Mat& R = w.R;
    const Mat D2PD1 = D2t * P * c.D1;

    Mat e1 = c.B2.transpose() - D2PD1 * Rti * B1t;
    Mat e2 = D2t - D2PD1 * Rti * D1t;
    Mat Fh = c.B2.transpose() * P + D2t * P * c.C - D2PD1 * Rti * St;
    Mat zmap = e2 * sel.M3 + D2PD1 * R * D1t * sel.M7;
    g.PM2 = e1 * sel.M3 * Phat + Fh * sel.M7 - D2PD1 * R * St * sel.M2 + D2PD1 * R * B1t * sel.M7 * Phat + zmap * g.Zc;
    g.phiM2 = e1 * sel.M3 * phihat + D2PD1 * R * B1t * sel.M7 * phihat - w.rho + zmap * g.Zo;

    Mat back = D1t * P * c.D2 * w.RRi;
    g.PM1 = B1t * Myb * Phat + D1t * Myb * g.Zc - St * sel.M2 - back * g.PM2;
    g.phiM1 = B1t * Myb * phihat + D1t * Myb * g.Zo - D1t * P * c.sigma - back * g.phiM2;

    g.Rti = Rti;
    g.RRi = w.RRi;
    g.R = R;
    g.Ff = -(2.0 / s.alpha) * c.R0.partialPivLu().inverse() * Mpb;
    g.Ff2 = (2.0 / s.gamma) * c.R0hat.partialPivLu().inverse() * Mxt;
    return g;
}

Mat u2_from_components(const Coeffs& c, const Mat& P, const LeaderCostWeights& w, const Mat& X, const Mat& Y,
                       const Mat& Z) {
    const int n = c.A.rows();
    auto part = [n](const Mat& v, int i) -> Mat { return v.block((i - 1) * n, 0, n, 1); };
    const Mat B1t = c.B1.transpose(), D1t = c.D1.transpose(), D2t = c.D2.transpose();
    const Mat D2PD1 = D2t * P * c.D1;
    const Mat& Rti = w.Rti;
    const Mat& R = w.R;
    Mat hatx = part(Y, 1), hatxbar = part(Y, 2);
    Mat kappa = part(Z, 1), chi = part(Z, 2);
    Mat hat_tilde_xbar = part(X, 9);
    Mat xbar = part(X, 2);
    Mat tilde_xbar = part(Y, 9);
    Mat upsilon = part(Z, 9);
    Mat BPDC = B1t * P + D1t * P * c.C;
    Mat r = (c.B2.transpose() - D2PD1 * Rti * B1t) * (hatx + hatxbar) + (D2t - D2PD1 * Rti * D1t) * (kappa + chi) +
            (c.B2.transpose() * P + D2t * P * c.C - D2PD1 * Rti * BPDC) * hat_tilde_xbar -
            D2PD1 * R * BPDC * xbar + D2PD1 * R * B1t * tilde_xbar + D2PD1 * R * D1t * upsilon -
            D2PD1 * R * D1t * P * c.sigma;
    return w.RRi * r;
}

}  // namespace rsg
