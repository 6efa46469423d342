#include "rsg/instances.hpp"

namespace rsg {

namespace {

Mat m11(double v) { return Mat::Constant(1, 1, v); }

}  // namespace

GameSpec scalar_spec(const ScalarGame& p, int N) {
    GameSpec s;
    s.n = s.m1 = s.m2 = 1;
    s.grid = make_grid(p.T, N);
    auto c = [&](double v) { return MatrixPath::constant(s.grid, m11(v)); };
    s.A = c(p.A);
    s.C = c(p.C);
    s.B1 = c(p.B1);
    s.B2 = c(p.B2);
    s.D1 = c(p.D1);
    s.D2 = c(p.D2);
    s.sigma = c(p.sigma);
    s.f1 = c(p.f1);
    s.Q = c(p.Q);
    s.R1 = c(p.R1);
    s.R2 = c(p.R2);
    s.R0 = c(p.R0);
    s.R0hat = c(p.R0hat);
    s.G = m11(p.G);
    s.alpha = p.alpha;
    s.gamma = p.gamma;
    s.xi = Vec::Constant(1, p.xi);
    return s;
}

ScalarGame production_style() {
    ScalarGame p;
    p.A = 0.5;
    p.C = -0.5;
    p.B1 = p.B2 = p.D1 = p.D2 = 1.0;
    p.Q = 1.0;
    p.G = 1.0;
    p.R1 = -0.2;
    p.R2 = -1.0;
    p.sigma = 0.2;
    p.f1 = 0.1;
    p.alpha = 20.0;
    p.gamma = 5.0;
    return p;
}

ScalarGame moderate_instance() {
    ScalarGame p = production_style();
    p.D1 = p.D2 = 0.5;
    p.R1 = 0.5;
    p.R2 = -2.0;
    return p;
}

ScalarGame mild_instance() {
    ScalarGame p;
    p.A = 0.1;
    p.C = -0.1;
    p.B1 = p.B2 = p.D1 = p.D2 = 0.3;
    p.Q = 0.2;
    p.G = 0.2;
    p.R1 = 1.0;
    p.R2 = -2.0;
    p.sigma = 0.2;
    p.f1 = 0.1;
    p.alpha = 20.0;
    p.gamma = 5.0;
    return p;
}

ScalarGame production_example(double a, double c, double q, double g, double r1, double r2, double T) {
    ScalarGame p;
    p.A = 1.0 - a;
    p.C = c;
    p.B1 = p.B2 = p.D1 = p.D2 = 1.0;
    p.Q = q;
    p.G = g;
    p.R1 = r1;
    p.R2 = r2;
    p.alpha = p.gamma = 100.0;
    p.T = T;
    return p;
}

GameSpec homogeneous_game(int n, double xi, int N) {
    GameSpec s;
    s.n = n;
    s.m1 = s.m2 = 1;
    s.grid = make_grid(1.0, N);
    auto c = [&](const Mat& m) { return MatrixPath::constant(s.grid, m); };
    Mat A = Mat::Identity(n, n) * 0.3;
    if (n > 1) A(0, 1) = 0.1;
    s.A = c(A);
    s.C = c(Mat::Identity(n, n) * 0.2);
    s.B1 = c(Mat::Constant(n, 1, 1.0));
    s.B2 = c(Mat::Constant(n, 1, 0.5));
    s.D1 = c(Mat::Constant(n, 1, 0.1));
    s.D2 = c(Mat::Constant(n, 1, 0.1));
    s.sigma = c(Mat::Zero(n, 1));
    s.f1 = c(Mat::Zero(n, 1));
    s.Q = c(Mat::Zero(n, n));
    s.R1 = c(m11(1.0));
    s.R2 = c(m11(-2.0));
    s.R0 = c(Mat::Identity(n, n));
    s.R0hat = c(Mat::Identity(n, n));
    s.G = Mat::Zero(n, n);
    s.alpha = 4.0;
    s.gamma = 4.0;
    s.xi = Vec::Constant(n, xi);
    return s;
}

GameSpec random_spec(std::mt19937_64& rng, int n, bool special, int N) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rnd = [&](int r, int c, double scale) {
        Mat m(r, c);
        for (int j = 0; j < c; ++j)
            for (int i = 0; i < r; ++i) m(i, j) = scale * u(rng);
        return m;
    };
    auto spd = [&](double base, double scale) {
        Mat m = rnd(n, n, scale);
        return Mat(m * m.transpose() + base * Mat::Identity(n, n));
    };
    GameSpec s;
    s.n = n;
    s.m1 = s.m2 = 1;
    s.grid = make_grid(1.0, N);
    auto c = [&](const Mat& m) { return MatrixPath::constant(s.grid, m); };
    s.A = c(rnd(n, n, 0.4));
    s.C = c(special ? Mat::Zero(n, n) : rnd(n, n, 0.3));
    s.B1 = c(rnd(n, 1, 0.8));
    s.B2 = c(rnd(n, 1, 0.8));
    s.D1 = c(special ? Mat::Zero(n, 1) : rnd(n, 1, 0.3));
    s.D2 = c(special ? Mat::Zero(n, 1) : rnd(n, 1, 0.3));
    s.sigma = c(rnd(n, 1, 0.3));
    s.f1 = c(rnd(n, 1, 0.3));
    s.Q = c(spd(0.2, 0.4));
    s.R1 = c(m11(1.0 + 0.5 * (u(rng) + 1.0)));
    s.R2 = c(m11(-2.0 - 0.5 * (u(rng) + 1.0)));
    s.R0 = c(spd(1.0, 0.3));
    s.R0hat = c(spd(1.0, 0.3));
    s.G = spd(0.2, 0.4);
    s.alpha = 10.0 + 10.0 * (u(rng) + 1.0);
    s.gamma = 10.0 + 10.0 * (u(rng) + 1.0);
    s.xi = rnd(n, 1, 1.0);
    return s;
}

}  // namespace rsg
