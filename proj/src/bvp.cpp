#include "rsg/montecarlo.hpp"

namespace rsg {

Trajectories bvp_oracle(const EquilibriumSolution& sol, int N) {
    const double T = sol.spec.grid.T;
    TimeGrid g = make_grid(T, N);
    const double h = g.dt();
    const DoubleHatBlocks d0 = sol.stages_at(0.0, 0).dh;
    const int m = static_cast<int>(d0.A1.rows());
    const int nu = 2 * m * (N + 1);
    auto xi = [&](int k) { return k * m; };
    auto yi = [&](int k) { return (N + 1) * m + k * m; };
    const Mat I = Mat::Identity(m, m);

    Mat A = Mat::Zero(nu, nu);
    Vec b = Vec::Zero(nu);
    int r = 0;
    A.block(r, xi(0), m, m) = I;
    b.segment(r, m) = Eigen::Map<const Vec>(d0.Xi.data(), m);
    r += m;
    // implicit Euler forward, noise dropped
    for (int k = 0; k < N; ++k) {
        DoubleHatBlocks d = sol.stages_at(g.t(k + 1)).dh;
        A.block(r, xi(k + 1), m, m) = I - h * d.A1;
        A.block(r, yi(k + 1), m, m) = -h * d.B1;
        A.block(r, xi(k), m, m) = -I;
        b.segment(r, m) = h * Eigen::Map<const Vec>(d.F.data(), m);
        r += m;
    }
    // implicit Euler backward
    for (int k = 0; k < N; ++k) {
        DoubleHatBlocks d = sol.stages_at(g.t(k)).dh;
        A.block(r, yi(k), m, m) = I - h * d.A2.transpose();
        A.block(r, xi(k), m, m) = h * d.Q;
        A.block(r, yi(k + 1), m, m) = -I;
        b.segment(r, m) = -h * Eigen::Map<const Vec>(d.Ups.data(), m);
        r += m;
    }
    DoubleHatBlocks dT = sol.stages_at(T, sol.spec.grid.N).dh;
    A.block(r, yi(N), m, m) = I;
    A.block(r, xi(N), m, m) = -dT.G;

    Eigen::PartialPivLU<Mat> lu(A);
    if (!(lu.rcond() > 1e-14)) throw SolverError("bvp oracle", -1, "assembled system is singular");
    Vec z = lu.solve(b);

    Trajectories out;
    out.grid = g;
    for (int k = 0; k <= N; ++k) {
        out.X.push_back(z.segment(xi(k), m));
        out.Y.push_back(z.segment(yi(k), m));
    }
    return out;
}

Trajectories skeleton_pipeline(const EquilibriumSolution& sol, int N) {
    const int refine = std::max(1, (512 + N - 1) / N);
    const GameSpec fine = regrid(sol.spec, N * refine);
    const TimeGrid& fg = fine.grid;
    const MatrixPath& P = sol.P.P;
    const double delta = sol.delta;
    auto dh = [&](double t) { return build_stages(fine, t, P(t), delta).dh; };

    RiccatiProblem prob = r4_skeleton_problem(fine, P, delta);
    MatrixPath Ph = solve_riccati_generalized(prob, delta).P;
    MatrixPath phi = solve_offset(prob, Ph, [&](double t) {
                         DoubleHatBlocks d = dh(t);
                         return OffsetSources{d.F, Mat::Zero(d.F.rows(), 1), d.Ups};
                     }).phi;
    auto rhs = [&](double t, const Mat& X) -> Mat {
        DoubleHatBlocks d = dh(t);
        return (d.A1 + d.B1 * Ph(t)) * X + d.B1 * phi(t) + d.F;
    };
    MatrixPath X = integrate_forward(rhs, dh(0.0).Xi, fg, "skeleton");

    Trajectories out;
    out.grid = make_grid(fg.T, N);
    for (int k = 0; k <= N; ++k) {
        const int kf = k * refine;
        Mat x = X.node(kf);
        Mat y = Ph.node(kf) * x + phi.node(kf);
        out.X.push_back(Eigen::Map<const Vec>(x.data(), x.size()));
        out.Y.push_back(Eigen::Map<const Vec>(y.data(), y.size()));
    }
    return out;
}

double max_relative_gap(const Trajectories& a, const Trajectories& b) {
    auto gap = [](const std::vector<Vec>& p, const std::vector<Vec>& q) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            num = std::max(num, (p[k] - q[k]).cwiseAbs().maxCoeff());
            den = std::max(den, q[k].cwiseAbs().maxCoeff());
        }
        return den > 0.0 ? num / den : num;
    };
    if (a.X.size() != b.X.size()) throw SpecError("trajectory bundles on different grids");
    return std::max(gap(a.X, b.X), gap(a.Y, b.Y));
}

}  // namespace rsg
