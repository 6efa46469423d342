#include "rsg/backward.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace rsg {

MatrixPath integrate_backward(const BackwardRhs& rhs, const Mat& terminal, const TimeGrid& g, const std::string& stage) {
    const int N = g.N;
    const double h = g.dt();
    std::vector<Mat> P(N + 1), D(N + 1);
    P[N] = terminal;
    for (int k = N; k > 0; --k) {
        const double t = g.t(k);
        const Mat& p = P[k];
        Mat k1 = rhs(t, p);
        D[k] = k1;
        Mat k2 = rhs(t - 0.5 * h, p - 0.5 * h * k1);
        Mat k3 = rhs(t - 0.5 * h, p - 0.5 * h * k2);
        Mat k4 = rhs(g.t(k - 1), p - h * k3);
        P[k - 1] = p - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!P[k - 1].allFinite()) throw SolverError(stage, k - 1, "non-finite value (finite escape)");
    }
    D[0] = rhs(0.0, P[0]);
    return MatrixPath(g, std::move(P), std::move(D));
}

MatrixPath integrate_forward(const BackwardRhs& rhs, const Mat& initial, const TimeGrid& g, const std::string& stage) {
    const int N = g.N;
    const double h = g.dt();
    std::vector<Mat> X(N + 1), D(N + 1);
    X[0] = initial;
    for (int k = 0; k < N; ++k) {
        const double t = g.t(k);
        const Mat& x = X[k];
        Mat k1 = rhs(t, x);
        D[k] = k1;
        Mat k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
        Mat k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
        Mat k4 = rhs(g.t(k + 1), x + h * k3);
        X[k + 1] = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!X[k + 1].allFinite()) throw SolverError(stage, k + 1, "non-finite value");
    }
    D[N] = rhs(g.T, X[N]);
    return MatrixPath(g, std::move(X), std::move(D));
}

RiccatiProblem RiccatiProblem::from_paths(const MatrixPath& A1, const MatrixPath& A2, const MatrixPath& B1,
                                          const MatrixPath& Q, const Mat& Pterm) {
    RiccatiProblem p;
    p.d = Pterm.rows();
    p.Pterm = Pterm;
    p.grid = A1.grid();
    p.coef = [A1, A2, B1, Q](double t) {
        RiccatiCoefficients c;
        c.A1 = A1(t);
        c.A2 = A2(t);
        c.B1 = B1(t);
        c.Q = Q(t);
        return c;
    };
    return p;
}

Mat riccati_rhs(const RiccatiCoefficients& c, const Mat& P) {
    Mat r = P * c.A1 + c.A2.transpose() * P + P * c.B1 * P - c.Q;
    if (c.fraction) {
        Mat IPD = Mat::Identity(P.rows(), P.rows()) - P * c.D2;
        r += (c.C2.transpose() + P * c.B2) * IPD.partialPivLu().solve(P * c.C1 + P * c.D1 * P);
    }
    return -r;
}

RiccatiSolution solve_riccati_follower(const GameSpec& s, double delta) {
    auto rhs = [&s](double t, const Mat& P) -> Mat {
        Coeffs c = coeffs_at(s, t);
        Mat S = P * c.B1 + c.C.transpose() * P * c.D1;
        Mat Rt = c.R1 + c.D1.transpose() * P * c.D1;
        Mat r = P * c.A + c.A.transpose() * P + c.C.transpose() * P * c.C + c.Q - S * Rt.partialPivLu().solve(S.transpose());
        return -r;
    };
    RiccatiSolution sol;
    sol.P = integrate_backward(rhs, s.G, s.grid, "(riccati)");
    RegularityLog lg{"R1 + D1'PD1", {}, {}};
    for (int k = 0; k <= s.grid.N; ++k) {
        double t = s.grid.t(k);
        Mat Rt = s.R1(t) + s.D1(t).transpose() * sol.P.node(k) * s.D1(t);
        lg.min_eig.push_back(min_eig_sym(Rt));
        lg.max_eig.push_back(max_eig_sym(Rt));
    }
    // first violation in time order
    for (int k = 0; k <= s.grid.N; ++k)
        if (!(lg.min_eig[k] >= delta))
            throw SolverError("(riccati)", k, "R1 + D1'PD1 not uniformly positive (min eigenvalue " +
                                                  std::to_string(lg.min_eig[k]) + ")");
    sol.log.push_back(std::move(lg));
    return sol;
}

RiccatiSolution solve_riccati_R1(const GameSpec& s) {
    const double a2 = 2.0 / s.alpha;
    auto rhs = [&s, a2](double t, const Mat& P1) -> Mat {
        Coeffs c = coeffs_at(s, t);
        Mat r = P1 * c.A + c.A.transpose() * P1 - a2 * P1 * c.R0.ldlt().solve(P1) + c.C.transpose() * P1 * c.C - c.Q;
        return -r;
    };
    RiccatiSolution sol;
    sol.P = integrate_backward(rhs, -s.G, s.grid, "(R-1)");
    return sol;
}

RiccatiSolution solve_riccati_generalized(const RiccatiProblem& prob, double delta) {
    auto rhs = [&prob](double t, const Mat& P) { return riccati_rhs(prob.coef(t), P); };
    RiccatiSolution sol;
    sol.P = integrate_backward(rhs, prob.Pterm, prob.grid, prob.stage);
    if (prob.coef(prob.grid.T).fraction) {
        RegularityLog lg{"I - P*D2", {}, {}};
        for (int k = 0; k <= prob.grid.N; ++k) {
            RiccatiCoefficients c = prob.coef(prob.grid.t(k));
            Mat IPD = Mat::Identity(prob.d, prob.d) - sol.P.node(k) * c.D2;
            Eigen::JacobiSVD<Mat> svd(IPD);
            lg.min_eig.push_back(svd.singularValues().minCoeff());
            lg.max_eig.push_back(svd.singularValues().maxCoeff());
            if (!(lg.min_eig.back() >= delta))
                throw SolverError(prob.stage, k, "I - P*D2 near singular (decoupling failure)");
        }
        sol.log.push_back(std::move(lg));
    }
    return sol;
}

OffsetSolution solve_offset(const RiccatiProblem& prob, const MatrixPath& P, const OffsetSourceFn& src) {
    auto rhs = [&](double t, const Mat& phi) -> Mat {
        RiccatiCoefficients c = prob.coef(t);
        Mat Pt = P(t);
        OffsetSources s = src(t);
        Mat r = (c.A2.transpose() + Pt * c.B1) * phi + Pt * s.F - s.Ups;
        if (c.fraction) {
            Mat IPD = Mat::Identity(prob.d, prob.d) - Pt * c.D2;
            Mat K2 = IPD.transpose().partialPivLu().solve((c.C2.transpose() + Pt * c.B2).transpose()).transpose();
            r += K2 * (Pt * c.D1 * phi + Pt * s.Sigma);
        }
        return -r;
    };
    return OffsetSolution{integrate_backward(rhs, Mat::Zero(prob.d, 1), prob.grid, prob.stage + " offset")};
}

OffsetSolution solve_offset_R1(const GameSpec& s, const MatrixPath& P1, const std::function<Mat(double)>& u1,
                               const std::function<Mat(double)>& u2, bool with_sigma) {
    const double a2 = 2.0 / s.alpha;
    auto rhs = [&](double t, const Mat& phi) -> Mat {
        Coeffs c = coeffs_at(s, t);
        Mat p1 = P1(t);
        Mat v1 = u1(t), v2 = u2(t);
        Mat r = (c.A.transpose() - a2 * p1 * c.R0.inverse()) * phi + p1 * (c.B1 * v1 + c.B2 * v2) +
                c.C.transpose() * p1 * (c.D1 * v1 + c.D2 * v2);
        if (with_sigma) r += c.C.transpose() * p1 * c.sigma;
        return -r;
    };
    return OffsetSolution{integrate_backward(rhs, Mat::Zero(s.n, 1), s.grid, "(B-1)")};
}

MatrixPath solve_lyapunov(const std::function<Mat(double)>& Atil, const std::function<Mat(double)>& Ctil,
                          const std::function<Mat(double)>& source, const Mat& terminal, const TimeGrid& grid) {
    auto rhs = [&](double t, const Mat& L) -> Mat {
        Mat A = Atil(t), C = Ctil(t);
        return -(L * A + A.transpose() * L + C.transpose() * L * C + source(t));
    };
    return integrate_backward(rhs, terminal, grid, "Lyapunov");
}

OffsetSolution solve_value_offset(const std::function<Mat(double)>& Atil, const std::function<Mat(double)>& Ctil,
                                  const std::function<Mat(double)>& Btil, const std::function<Mat(double)>& Dtil,
                                  const MatrixPath& L, const std::function<Mat(double)>& source,
                                  const TimeGrid& grid) {
    auto rhs = [&](double t, const Mat& psi) -> Mat {
        Mat Lt = L(t);
        return -(Atil(t).transpose() * psi + Lt * Btil(t) + Ctil(t).transpose() * Lt * Dtil(t) + source(t));
    };
    return OffsetSolution{integrate_backward(rhs, Mat::Zero(L.rows(), 1), grid, "value offset")};
}

RiccatiSolution closed_form_special_case(const RiccatiProblem& prob) {
    const int d = prob.d;
    const Mat& G = prob.Pterm;
    for (int k = 0; k <= prob.grid.N; ++k) {
        RiccatiCoefficients c = prob.coef(prob.grid.t(k));
        if (c.fraction && (c.C1.norm() + c.C2.norm() + c.D1.norm() + c.D2.norm() + c.B2.norm()) > 0.0)
            throw SolverError(prob.stage, k, "closed form needs C = D1 = D2 = 0");
    }
    auto Acheck = [&](double t) {
        RiccatiCoefficients c = prob.coef(t);
        Mat M(2 * d, 2 * d);
        M << c.A1 + c.B1 * G, c.B1, -G * c.A1 - c.A2.transpose() * G - G * c.B1 * G + c.Q, -c.A2.transpose() - G * c.B1;
        return M;
    };
    // Psi(T, t) as a function of t
    auto rhs = [&](double t, const Mat& Phi) -> Mat { return -Phi * Acheck(t); };
    MatrixPath Psi = integrate_backward(rhs, Mat::Identity(2 * d, 2 * d), prob.grid, prob.stage + " fundamental");
    std::vector<Mat> P(prob.grid.N + 1), D(prob.grid.N + 1);
    RegularityLog lg{"corner condition number", {}, {}};
    for (int k = 0; k <= prob.grid.N; ++k) {
        const Mat& F = Psi.node(k);
        Mat F22 = F.block(d, d, d, d), F21 = F.block(d, 0, d, d);
        Eigen::JacobiSVD<Mat> svd(F22);
        double cond = svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
        lg.min_eig.push_back(cond);
        lg.max_eig.push_back(cond);
        if (!(cond <= 1e12)) throw SolverError(prob.stage, k, "ill-conditioned corner block of the fundamental matrix");
        P[k] = k == prob.grid.N ? G : Mat(G - F22.partialPivLu().solve(F21));
        D[k] = riccati_rhs(prob.coef(prob.grid.t(k)), P[k]);
    }
    RiccatiSolution sol;
    sol.P = MatrixPath(prob.grid, std::move(P), std::move(D));
    sol.log.push_back(std::move(lg));
    return sol;
}

std::vector<Mat> node_derivatives(const MatrixPath& p) {
    const int N = p.grid().N;
    const double h = p.grid().dt();
    if (N < 4) throw std::invalid_argument("need at least 4 steps for finite differences");
    auto f = [&](int k) -> const Mat& { return p.node(k); };
    std::vector<Mat> d(N + 1);
    d[0] = (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4)) / (12 * h);
    d[1] = (-3 * f(0) - 10 * f(1) + 18 * f(2) - 6 * f(3) + f(4)) / (12 * h);
    for (int k = 2; k <= N - 2; ++k) d[k] = (f(k - 2) - 8 * f(k - 1) + 8 * f(k + 1) - f(k + 2)) / (12 * h);
    d[N - 1] = (3 * f(N) + 10 * f(N - 1) - 18 * f(N - 2) + 6 * f(N - 3) - f(N - 4)) / (12 * h);
    d[N] = (25 * f(N) - 48 * f(N - 1) + 36 * f(N - 2) - 16 * f(N - 3) + 3 * f(N - 4)) / (12 * h);
    return d;
}

std::vector<double> riccati_residuals(const RiccatiProblem& prob, const MatrixPath& P) {
    std::vector<Mat> dP = node_derivatives(P);
    std::vector<double> out;
    for (int k = 0; k <= prob.grid.N; ++k) {
        Mat r = dP[k] - riccati_rhs(prob.coef(prob.grid.t(k)), P.node(k));
        out.push_back(r.cwiseAbs().maxCoeff());
    }
    return out;
}

void write_csv(std::ostream& os, const MatrixPath& p, const std::string& name) {
    os << "t";
    const bool wide = p.rows() > 9 || p.cols() > 9;
    for (int i = 0; i < p.rows(); ++i)
        for (int j = 0; j < p.cols(); ++j)
            os << ", " << name << "_" << i + 1 << (wide ? "_" : "") << j + 1;
    os << "\n" << std::setprecision(17);
    for (int k = 0; k <= p.grid().N; ++k) {
        os << p.grid().t(k);
        const Mat& m = p.node(k);
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) os << ", " << m(i, j);
        os << "\n";
    }
}

}  // namespace rsg
