#include "rsg/montecarlo.hpp"

#include "kernels.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace rsg {

Vec Direction::operator()(double t) const {
    const int K = static_cast<int>(pieces.size());
    int j = static_cast<int>(std::floor(t / T * K));
    j = std::clamp(j, 0, K - 1);
    return pieces[j];
}

Direction Direction::random(int dim, double T, int pieces, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Direction d;
    d.T = T;
    double norm2 = 0.0;
    for (int j = 0; j < pieces; ++j) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v[i] = nd(rng);
        norm2 += v.squaredNorm() * T / pieces;
        d.pieces.push_back(v);
    }
    for (Vec& v : d.pieces) v /= std::sqrt(norm2);
    return d;
}

Direction Direction::zero(int dim, double T) {
    Direction d;
    d.T = T;
    d.pieces.push_back(Vec::Zero(dim));
    return d;
}

Direction perturbation_direction(std::uint64_t seed, int kind, int j, int dim, double T, int pieces) {
    std::mt19937_64 rng = path_rng(seed ^ 0x6a09e667f3bcc909ULL, 1000003ULL * kind + j);
    return Direction::random(dim, T, pieces, rng);
}

std::string verdict(bool minimizer, double eps, double dj, double se) {
    if (eps == 0.0) return dj == 0.0 && se == 0.0 ? "pass" : "fail";
    if (se > std::abs(eps) / 3.0) return "inconclusive";
    bool ok = minimizer ? dj >= -3.0 * se : dj <= 3.0 * se;
    return ok ? "pass" : "fail";
}

bool PerturbationReport::all_pass() const {
    for (const auto& r : rows)
        if (r.verdict != "pass") return false;
    return !rows.empty();
}

void PerturbationReport::write_csv(std::ostream& os) const {
    os << "test,direction,eps,delta_j,stderr,verdict\n";
    os << std::setprecision(17);
    for (const auto& r : rows)
        os << r.test << ',' << r.direction << ',' << r.eps << ',' << r.delta_j << ',' << r.stderr_ << ','
           << r.verdict << '\n';
}

namespace {

enum class Kind { follower, leader, fdist, ldist };

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::follower: return "follower";
        case Kind::leader: return "leader";
        case Kind::fdist: return "follower_disturbance";
        case Kind::ldist: return "leader_disturbance";
    }
    return "?";
}

bool is_min(Kind k) { return k == Kind::follower || k == Kind::ldist; }

struct Arm {
    Kind kind;
    double eps;
    int dir;
    int vdim;
    std::vector<double> v;    // steps x vdim
    std::vector<double> phi;  // steps x (n or 5n), directional offset
};

// per-step matrices the deviating arms need beyond the base plan
struct ArmStep {
    Mat a2R0i, g2Rhi, P1;
    Mat P3, bA, bB1, bB2, bB3, bC, bD1, bD2, bD3;
    Mat Wc, Wd1, Wd2;  // dZ = Wc dX + Wd1 dY + Wd2 v
    Mat U1y, U1z, U1x, U1v;  // du1 = U1y dybar + U1z dzbar - U1x dxbar - U1v v
};

void fill(std::vector<double>& out, int k, int dim, const Mat& m) {
    for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(k) * dim + i] = m(i, 0);
}

}  // namespace

PerturbationReport perturb_best_response(const EquilibriumSolution& sol, const SimConfig& cfg, int directions,
                                         const std::vector<double>& eps, int pieces) {
    if (cfg.paths < 2) throw SpecError("perturbation tests need at least 2 paths");
    const GameSpec& s = sol.spec;
    const int n = s.n, n5 = 5 * n, m1 = s.m1, m2 = s.m2;
    const SimPlan plan = make_plan(sol, cfg.substeps);
    const int steps = plan.steps, d = plan.d;
    const double h = plan.h, sh = std::sqrt(h);

    RiccatiProblem r3 = r3_problem(s, sol.P.P, sol.delta);
    MatrixPath P3 = sol.P3 ? sol.P3->P : solve_riccati_generalized(r3, sol.delta).P;

    std::vector<ArmStep> ex(steps);
    for (int k = 0; k < steps; ++k) {
        const double t = plan.t(k);
        const Coeffs& c = plan.coef[k];
        StagePack st = sol.stages_at(t);
        const BlackboardBlocks& b = st.bb;
        ArmStep& e = ex[k];
        e.a2R0i = (2.0 / s.alpha) * c.R0.inverse();
        e.g2Rhi = (2.0 / s.gamma) * c.R0hat.inverse();
        e.P1 = sol.P1.P(t);
        e.P3 = P3(t);
        e.bA = b.A;
        e.bB1 = b.B1;
        e.bB2 = b.B2;
        e.bB3 = b.B3;
        e.bC = b.C;
        e.bD1 = b.D1;
        e.bD2 = b.D2;
        e.bD3 = b.D3;
        Mat W = (Mat::Identity(n5, n5) - e.P3 * b.D3).inverse();
        e.Wc = W * e.P3 * b.C;
        e.Wd1 = W * e.P3 * b.D1;
        e.Wd2 = W * e.P3 * b.D2;
        Mat Pf = sol.P.P(t);
        const Mat& Rti = st.w.Rti;
        e.U1y = Rti * c.B1.transpose();
        e.U1z = Rti * c.D1.transpose();
        e.U1x = Rti * st.w.S.transpose();
        e.U1v = Rti * c.D1.transpose() * Pf * c.D2;
    }

    // baselines first, one per kind, then the deviating arms
    std::vector<Arm> arms;
    const Kind kinds[] = {Kind::follower, Kind::leader, Kind::fdist, Kind::ldist};
    auto vdim_of = [&](Kind k) { return k == Kind::follower ? m1 : k == Kind::leader ? m2 : n; };
    auto phidim_of = [&](Kind k) { return k == Kind::follower ? n : k == Kind::leader ? n5 : 0; };
    for (Kind k : kinds) {
        Arm a{k, 0.0, -1, vdim_of(k), {}, {}};
        a.v.assign(static_cast<std::size_t>(steps) * a.vdim, 0.0);
        a.phi.assign(static_cast<std::size_t>(steps) * phidim_of(k), 0.0);
        arms.push_back(std::move(a));
    }
    for (Kind k : kinds) {
        const int vd = vdim_of(k), pd = phidim_of(k);
        for (int j = 0; j < directions; ++j) {
            Direction dir = perturbation_direction(cfg.seed, static_cast<int>(k), j, vd, s.grid.T, pieces);
            auto vfn = [&](double t) { return Mat(dir(t)); };
            MatrixPath phi;
            if (k == Kind::follower) {
                phi = solve_offset_R1(s, sol.P1.P, vfn, [&](double) { return Mat::Zero(m2, 1).eval(); }, false).phi;
            } else if (k == Kind::leader) {
                phi = solve_offset(r3, P3, [&](double t) {
                          StagePack st = sol.stages_at(t);
                          Mat v = vfn(t);
                          return OffsetSources{st.bb.B2 * v, st.bb.D2 * v, st.bb.F2 * v};
                      }).phi;
            }
            std::vector<double> vv(static_cast<std::size_t>(steps) * vd), pp(static_cast<std::size_t>(steps) * pd);
            for (int q = 0; q < steps; ++q) {
                fill(vv, q, vd, vfn(plan.t(q)));
                if (pd) fill(pp, q, pd, phi(plan.t(q)));
            }
            for (double e : eps) arms.push_back(Arm{k, e, j, vd, vv, pp});
        }
    }

    const long np = cfg.paths;
    const int na = static_cast<int>(arms.size());
    std::vector<double> J(static_cast<std::size_t>(na) * np);
    std::vector<char> bad(np, 0);

#pragma omp parallel if (cfg.parallel)
    {
        std::vector<double> dW(steps), X(d), Xn(d);
        std::vector<double> bu1(static_cast<std::size_t>(steps) * m1), bu2(static_cast<std::size_t>(steps) * m2),
            bfb(static_cast<std::size_t>(steps) * n), bf2(static_cast<std::size_t>(steps) * n);
        std::vector<double> x(n), xn(n), U1(m1), U2(m2), F(n), df(n), dx(n), dxn(n);
        std::vector<double> dX(n5), dXn(n5), dY(n5), dZ(n5), du1(m1), df2(n);
#pragma omp for schedule(static)
        for (long path = 0; path < np; ++path) {
            std::mt19937_64 rng = path_rng(cfg.seed, static_cast<std::uint64_t>(path));
            std::normal_distribution<double> nd;
            for (int k = 0; k < steps; ++k) dW[k] = cfg.noise ? sh * nd(rng) : 0.0;

            for (int i = 0; i < d; ++i) X[i] = plan.X0[i];
            for (int k = 0; k < steps; ++k) {
                kern::affine(plan.K1[k], plan.k1[k], X.data(), &bu1[static_cast<std::size_t>(k) * m1]);
                kern::affine(plan.K2[k], plan.k2[k], X.data(), &bu2[static_cast<std::size_t>(k) * m2]);
                kern::affine(plan.Kf[k], plan.kf[k], X.data(), &bfb[static_cast<std::size_t>(k) * n]);
                kern::affine(plan.Kf2[k], plan.kf2[k], X.data(), &bf2[static_cast<std::size_t>(k) * n]);
                for (int i = 0; i < d; ++i) Xn[i] = X[i] + h * plan.B[k][i] + dW[k] * plan.D[k][i];
                kern::gemv(plan.A[k], X.data(), Xn.data(), h);
                kern::gemv(plan.C[k], X.data(), Xn.data(), dW[k]);
                X.swap(Xn);
            }

            bool ok = true;
            for (int ai = 0; ai < na; ++ai) {
                const Arm& a = arms[ai];
                const double e = a.eps;
                const bool fside = a.kind == Kind::follower || a.kind == Kind::fdist;
                for (int i = 0; i < n; ++i) x[i] = s.xi[i];
                std::fill(dx.begin(), dx.end(), 0.0);
                std::fill(dX.begin(), dX.end(), 0.0);
                double j = 0.0;
                for (int k = 0; k < steps; ++k) {
                    const Coeffs& c = plan.coef[k];
                    const ArmStep& es = ex[k];
                    const double* u1 = &bu1[static_cast<std::size_t>(k) * m1];
                    const double* u2 = &bu2[static_cast<std::size_t>(k) * m2];
                    const double* fb = &bfb[static_cast<std::size_t>(k) * n];
                    const double* f2 = &bf2[static_cast<std::size_t>(k) * n];
                    const double* v = &a.v[static_cast<std::size_t>(k) * a.vdim];
                    for (int i = 0; i < m1; ++i) U1[i] = u1[i];
                    for (int i = 0; i < m2; ++i) U2[i] = u2[i];
                    switch (a.kind) {
                        case Kind::fdist:
                            for (int i = 0; i < n; ++i) F[i] = fb[i] + e * v[i];
                            break;
                        case Kind::ldist:
                            for (int i = 0; i < n; ++i) F[i] = f2[i] + e * v[i];
                            break;
                        case Kind::follower: {
                            const double* ph = &a.phi[static_cast<std::size_t>(k) * n];
                            for (int i = 0; i < n; ++i) xn[i] = ph[i];
                            kern::gemv(es.P1, dx.data(), xn.data());
                            std::fill(df.begin(), df.end(), 0.0);
                            kern::gemv(es.a2R0i, xn.data(), df.data(), -1.0);
                            for (int i = 0; i < m1; ++i) U1[i] = u1[i] + e * v[i];
                            for (int i = 0; i < n; ++i) F[i] = fb[i] + e * df[i];
                            break;
                        }
                        case Kind::leader: {
                            const double* ph = &a.phi[static_cast<std::size_t>(k) * n5];
                            for (int i = 0; i < n5; ++i) dY[i] = ph[i];
                            kern::gemv(es.P3, dX.data(), dY.data());
                            std::fill(dZ.begin(), dZ.end(), 0.0);
                            kern::gemv(es.Wc, dX.data(), dZ.data());
                            kern::gemv(es.Wd1, dY.data(), dZ.data());
                            kern::gemv(es.Wd2, v, dZ.data());
                            std::fill(du1.begin(), du1.end(), 0.0);
                            kern::gemv(es.U1y, &dY[3 * n], du1.data());
                            kern::gemv(es.U1z, &dZ[3 * n], du1.data());
                            kern::gemv(es.U1x, &dX[n], du1.data(), -1.0);
                            kern::gemv(es.U1v, v, du1.data(), -1.0);
                            std::fill(df2.begin(), df2.end(), 0.0);
                            kern::gemv(es.g2Rhi, dY.data(), df2.data());
                            for (int i = 0; i < m1; ++i) U1[i] = u1[i] + e * du1[i];
                            for (int i = 0; i < m2; ++i) U2[i] = u2[i] + e * v[i];
                            for (int i = 0; i < n; ++i) F[i] = f2[i] + e * df2[i];
                            break;
                        }
                    }
                    double run = kern::quad(c.Q, x.data()) + kern::quad(c.R1, U1.data()) + kern::quad(c.R2, U2.data());
                    if (fside)
                        run -= 0.5 * s.alpha * kern::quad(c.R0, F.data());
                    else
                        run += 0.5 * s.gamma * kern::quad(c.R0hat, F.data());
                    j += h * run;

                    const double w = dW[k];
                    for (int i = 0; i < n; ++i) {
                        double drift = F[i] + (fside ? 0.0 : c.f1(i, 0));
                        xn[i] = x[i] + h * drift + w * c.sigma(i, 0);
                    }
                    kern::gemv(c.A, x.data(), xn.data(), h);
                    kern::gemv(c.B1, U1.data(), xn.data(), h);
                    kern::gemv(c.B2, U2.data(), xn.data(), h);
                    kern::gemv(c.C, x.data(), xn.data(), w);
                    kern::gemv(c.D1, U1.data(), xn.data(), w);
                    kern::gemv(c.D2, U2.data(), xn.data(), w);

                    if (a.kind == Kind::follower) {
                        for (int i = 0; i < n; ++i) dxn[i] = dx[i] + h * df[i];
                        kern::gemv(c.A, dx.data(), dxn.data(), h);
                        kern::gemv(c.B1, v, dxn.data(), h);
                        kern::gemv(c.C, dx.data(), dxn.data(), w);
                        kern::gemv(c.D1, v, dxn.data(), w);
                        dx.swap(dxn);
                    } else if (a.kind == Kind::leader) {
                        dXn = dX;
                        kern::gemv(es.bA, dX.data(), dXn.data(), h);
                        kern::gemv(es.bB1, dY.data(), dXn.data(), h);
                        kern::gemv(es.bB3, dZ.data(), dXn.data(), h);
                        kern::gemv(es.bB2, v, dXn.data(), h);
                        kern::gemv(es.bC, dX.data(), dXn.data(), w);
                        kern::gemv(es.bD1, dY.data(), dXn.data(), w);
                        kern::gemv(es.bD3, dZ.data(), dXn.data(), w);
                        kern::gemv(es.bD2, v, dXn.data(), w);
                        dX.swap(dXn);
                    }
                    x.swap(xn);
                }
                j += kern::quad(s.G, x.data());
                if (!std::isfinite(j)) ok = false;
                J[static_cast<std::size_t>(ai) * np + path] = j;
            }
            bad[path] = !ok;
        }
    }

    long blown = 0;
    for (char b : bad) blown += b;
    if (static_cast<double>(blown) > 1e-3 * static_cast<double>(np))
        throw SolverError("perturbation", -1, std::to_string(blown) + " paths produced non-finite costs");

    PerturbationReport rep;
    for (int ai = 4; ai < na; ++ai) {
        const Arm& a = arms[ai];
        const int base = static_cast<int>(a.kind);
        std::vector<double> diff;
        diff.reserve(np);
        for (long p = 0; p < np; ++p)
            if (!bad[p])
                diff.push_back(J[static_cast<std::size_t>(ai) * np + p] - J[static_cast<std::size_t>(base) * np + p]);
        Stat st = mean_stderr(diff);
        rep.rows.push_back({kind_name(a.kind), a.dir, a.eps, st.mean, st.stderr_,
                            verdict(is_min(a.kind), a.eps, st.mean, st.stderr_)});
    }
    return rep;
}

}  // namespace rsg
