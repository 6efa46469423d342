#include "rsg/montecarlo.hpp"

#include "kernels.hpp"

#include <cmath>

namespace rsg {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Vec col(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

}  // namespace

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed;
    std::uint64_t a = splitmix64(x);
    x = a ^ (stream * 0xd1b54a32d192ed03ULL);
    std::seed_seq seq{splitmix64(x), splitmix64(x), splitmix64(x), splitmix64(x)};
    return std::mt19937_64(seq);
}

Stat mean_stderr(const std::vector<double>& v) {
    Stat s;
    const std::size_t n = v.size();
    if (n == 0) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.stderr_ = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    }
    return s;
}

SimPlan make_plan(const EquilibriumSolution& sol, int substeps) {
    if (substeps < 1) throw SpecError("substeps must be >= 1");
    const GameSpec& s = sol.spec;
    SimPlan p;
    p.n = s.n;
    p.d = 10 * s.n;
    p.m1 = s.m1;
    p.m2 = s.m2;
    p.T = s.grid.T;
    p.steps = s.grid.N * substeps;
    p.h = p.T / p.steps;
    p.alpha = s.alpha;
    p.gamma = s.gamma;
    p.G = s.G;
    p.X0 = col(sol.stages_at(0.0, 0).dh.Xi);
    for (int k = 0; k < p.steps; ++k) {
        const double t = p.t(k);
        StagePack st = sol.stages_at(t);
        GainPoint g = build_gain_maps(s, coeffs_at(s, t), sol.P.P(t), sol.Phat.P(t), st, sol.phihat(t), sol.delta);
        ClosedLoop cl = sol.closed_loop_at(t, st, g);
        p.A.push_back(cl.At);
        p.B.push_back(col(cl.Bt));
        p.C.push_back(cl.Ct);
        p.D.push_back(col(cl.Dt));
        p.K1.push_back(g.Rti * g.PM1);
        p.k1.push_back(col(g.Rti * g.phiM1));
        p.K2.push_back(g.RRi * g.PM2);
        p.k2.push_back(col(g.RRi * g.phiM2));
        Mat Ph = sol.Phat.P(t), ph = sol.phihat(t);
        p.Kf.push_back(g.Ff * Ph);
        p.kf.push_back(col(g.Ff * ph));
        p.Kf2.push_back(g.Ff2 * Ph);
        p.kf2.push_back(col(g.Ff2 * ph));
        p.coef.push_back(coeffs_at(s, t));
    }
    return p;
}

SimPlan make_linear_plan(const Mat& A, const Vec& B, const Mat& C, const Vec& D, const Vec& X0, double T,
                         int steps) {
    SimPlan p;
    p.d = static_cast<int>(A.rows());
    p.n = 1;
    p.steps = steps;
    p.T = T;
    p.h = T / steps;
    p.X0 = X0;
    p.with_costs = false;
    p.A.assign(steps, A);
    p.B.assign(steps, B);
    p.C.assign(steps, C);
    p.D.assign(steps, D);
    return p;
}

SimOutput simulate_plan(const SimPlan& p, const SimConfig& cfg) {
    if (cfg.paths < 1) throw SpecError("paths must be >= 1");
    const long np = cfg.paths;
    const int d = p.d, n = p.n;
    const double h = p.h, sh = std::sqrt(p.h);

    std::vector<double> J(np), Jf(np), Jtf(np), term(static_cast<std::size_t>(np) * d);
    std::vector<char> bad(np, 0);

#pragma omp parallel if (cfg.parallel)
    {
        std::vector<double> X(d), Xn(d), u1(p.m1), u2(p.m2), f(n), f2(n);
#pragma omp for schedule(static)
        for (long path = 0; path < np; ++path) {
            std::mt19937_64 rng = path_rng(cfg.seed, static_cast<std::uint64_t>(path));
            std::normal_distribution<double> nd;
            for (int i = 0; i < d; ++i) X[i] = p.X0[i];
            double j = 0.0, jf = 0.0, jtf = 0.0;
            for (int k = 0; k < p.steps; ++k) {
                if (p.with_costs) {
                    const Coeffs& c = p.coef[k];
                    kern::affine(p.K1[k], p.k1[k], X.data(), u1.data());
                    kern::affine(p.K2[k], p.k2[k], X.data(), u2.data());
                    kern::affine(p.Kf[k], p.kf[k], X.data(), f.data());
                    kern::affine(p.Kf2[k], p.kf2[k], X.data(), f2.data());
                    const double ctrl = kern::quad(c.R1, u1.data()) + kern::quad(c.R2, u2.data());
                    const double qx = kern::quad(c.Q, X.data());
                    j += h * (qx + ctrl);
                    jf += h * (kern::quad(c.Q, X.data() + n) + ctrl - 0.5 * p.alpha * kern::quad(c.R0, f.data()));
                    jtf += h * (qx + ctrl + 0.5 * p.gamma * kern::quad(c.R0hat, f2.data()));
                }
                const double dw = cfg.noise ? sh * nd(rng) : 0.0;
                for (int i = 0; i < d; ++i) Xn[i] = X[i] + h * p.B[k][i] + dw * p.D[k][i];
                kern::gemv(p.A[k], X.data(), Xn.data(), h);
                kern::gemv(p.C[k], X.data(), Xn.data(), dw);
                X.swap(Xn);
            }
            if (p.with_costs) {
                const double gx = kern::quad(p.G, X.data());
                j += gx;
                jf += kern::quad(p.G, X.data() + n);
                jtf += gx;
            }
            J[path] = j;
            Jf[path] = jf;
            Jtf[path] = jtf;
            for (int i = 0; i < d; ++i) term[static_cast<std::size_t>(path) * d + i] = X[i];
            bad[path] = !(kern::finite(X.data(), d) && std::isfinite(j) && std::isfinite(jf) && std::isfinite(jtf));
        }
    }

    // fixed-order reduction over the surviving paths
    SimOutput out;
    std::vector<double> gj, gjf, gjtf;
    out.terminal_mean = Vec::Zero(d);
    out.terminal_var = Vec::Zero(d);
    long good = 0;
    for (long i = 0; i < np; ++i) {
        if (bad[i]) {
            ++out.blown;
            continue;
        }
        ++good;
        gj.push_back(J[i]);
        gjf.push_back(Jf[i]);
        gjtf.push_back(Jtf[i]);
        out.terminal_mean += Eigen::Map<const Vec>(&term[static_cast<std::size_t>(i) * d], d);
    }
    if (static_cast<double>(out.blown) > 1e-3 * static_cast<double>(np))
        throw SolverError("simulate", -1, std::to_string(out.blown) + " of " + std::to_string(np) +
                                              " paths produced non-finite values");
    if (good > 0) out.terminal_mean /= static_cast<double>(good);
    if (good > 1) {
        for (long i = 0; i < np; ++i) {
            if (bad[i]) continue;
            Vec e = Eigen::Map<const Vec>(&term[static_cast<std::size_t>(i) * d], d) - out.terminal_mean;
            out.terminal_var += e.cwiseProduct(e);
        }
        out.terminal_var /= static_cast<double>(good - 1);
    }
    if (cfg.keep_terminal)
        for (long i = 0; i < np; ++i) out.terminal.push_back(Eigen::Map<const Vec>(&term[static_cast<std::size_t>(i) * d], d));
    out.J_stat = mean_stderr(gj);
    out.Jf_stat = mean_stderr(gjf);
    out.Jtf_stat = mean_stderr(gjtf);
    out.J = std::move(J);
    out.Jf = std::move(Jf);
    out.Jtf = std::move(Jtf);
    return out;
}

SimOutput simulate(const EquilibriumSolution& sol, const SimConfig& cfg) {
    return simulate_plan(make_plan(sol, cfg.substeps), cfg);
}

}  // namespace rsg
