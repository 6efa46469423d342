// one pass/fail line per acceptance criterion; exit status 1 if any fails
#include "rsg/instances.hpp"
#include "rsg/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace rsg;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double maxabs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// P' + P A1 + A2'P + P B1 P - Q + (C2' + P B2)(I - P D2)^-1 (P C1 + P D1 P), written out from the blocks
Mat unified_residual(const DoubleHatBlocks& d, const Mat& P, const Mat& dP) {
    const Mat I = Mat::Identity(P.rows(), P.cols());
    Mat frac = (d.C2.transpose() + P * d.B2) * (I - P * d.D2).inverse() * (P * d.C1 + P * d.D1 * P);
    return dP + P * d.A1 + d.A2.transpose() * P + P * d.B1 * P - d.Q + frac;
}

Mat follower_residual(const Coeffs& c, const Mat& P, const Mat& dP) {
    Mat S = P * c.B1 + c.C.transpose() * P * c.D1;
    Mat Rt = c.R1 + c.D1.transpose() * P * c.D1;
    return dP + P * c.A + c.A.transpose() * P + c.C.transpose() * P * c.C + c.Q - S * Rt.inverse() * S.transpose();
}

Mat r1_residual(const Coeffs& c, double alpha, const Mat& P1, const Mat& dP1) {
    return dP1 + P1 * c.A + c.A.transpose() * P1 - (2.0 / alpha) * P1 * c.R0.inverse() * P1 +
           c.C.transpose() * P1 * c.C - c.Q;
}

std::string fmt(const char* f, double a) {
    char b[64];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

// ---- 1: scalar production example ----
Outcome production_example_bode() {
    const double want = 1.5 * std::exp(4.0) - 0.5;
    auto t0 = std::chrono::steady_clock::now();
    MatrixPath P = scalar_bode(0.5, -1.0, 1.0, 1.0, -0.5, 2.0, 2000);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double p0 = P.node(0)(0, 0);
    const double rel = std::abs(p0 - want) / want;
    bool dec = true;
    for (int k = 0; k < 2000; ++k) dec = dec && P.node(k)(0, 0) > P.node(k + 1)(0, 0);
    bool term = P.node(2000)(0, 0) == 1.0;
    Outcome o;
    o.pass = rel <= 1e-8 && dec && term && secs < 1.0;
    o.detail = "P(0)=" + fmt("%.9f", p0) + " rel err " + fmt("%.2e", rel) + (dec ? " decreasing" : " NOT decreasing") +
               (term ? " P(2)=1" : " P(2)!=1") + " solve " + fmt("%.3f", secs) + "s";
    return o;
}

// ---- 2: residuals of P, P1 and Phat on random specs ----
Outcome riccati_residuals_random() {
    std::mt19937_64 rng(20240611);
    const int N = 400;
    int done = 0, draws = 0;
    double worst = 0.0;
    while (done < 10 && draws < 200) {
        ++draws;
        GameSpec s = random_spec(rng, 1 + done % 2, false, N);
        EquilibriumSolution sol;
        try {
            sol = solve_game(s);
        } catch (const SolverError&) {
            continue;
        }
        ++done;
        std::vector<Mat> dP = node_derivatives(sol.P.P), dP1 = node_derivatives(sol.P1.P),
                         dPh = node_derivatives(sol.Phat.P);
        for (int k = 0; k <= N; ++k) {
            const double t = s.grid.t(k);
            Coeffs c = coeffs_at(s, t);
            const Mat &P = sol.P.P.node(k), &P1 = sol.P1.P.node(k), &Ph = sol.Phat.P.node(k);
            DoubleHatBlocks d = build_stages(s, t, P, sol.delta, k).dh;
            worst = std::max(worst, maxabs(follower_residual(c, P, dP[k])) / (1 + P.norm()));
            worst = std::max(worst, maxabs(r1_residual(c, s.alpha, P1, dP1[k])) / (1 + P1.norm()));
            worst = std::max(worst, maxabs(unified_residual(d, Ph, dPh[k])) / (1 + Ph.norm()));
        }
    }
    Outcome o;
    o.pass = done == 10 && worst <= 1e-6;
    o.detail = std::to_string(done) + " specs (" + std::to_string(draws) + " draws), worst scaled residual " +
               fmt("%.2e", worst);
    return o;
}

// ---- 3: closed form vs direct integration when C = D1 = D2 = 0 ----
Outcome special_case_equivalence() {
    std::mt19937_64 rng(77);
    const int N = 200;
    int done = 0, draws = 0;
    double worst = 0.0;
    while (done < 5 && draws < 100) {
        ++draws;
        GameSpec s = random_spec(rng, 1 + done % 2, true, N);
        MatrixPath P;
        try {
            P = solve_riccati_follower(s).P;
            const RiccatiProblem probs[] = {r2_problem(s, P), r3_problem(s, P), r4_problem(s, P)};
            double w = 0.0;
            for (const RiccatiProblem& pr : probs) {
                MatrixPath a = solve_riccati_generalized(pr).P;
                MatrixPath b = closed_form_special_case(pr).P;
                for (int k = 0; k <= N; ++k) {
                    double den = maxabs(b.node(k));
                    double err = maxabs(a.node(k) - b.node(k));
                    w = std::max(w, den > 0 ? err / den : err);
                }
            }
            worst = std::max(worst, w);
            ++done;
        } catch (const SolverError&) {
        }
    }
    Outcome o;
    o.pass = done == 5 && worst <= 1e-6;
    o.detail = std::to_string(done) + " specs, worst relative gap " + fmt("%.2e", worst);
    return o;
}

// ---- 4: Monte Carlo cost vs value function ----
Outcome value_oracle() {
    EquilibriumSolution sol = solve_game(scalar_spec(moderate_instance(), 250));
    const double v = value(sol);
    SimConfig cfg;
    cfg.paths = 100000;
    cfg.substeps = 4;
    cfg.seed = 1;
    SimOutput out = simulate(sol, cfg);
    const double z = (out.J_stat.mean - v) / out.J_stat.stderr_;
    Outcome o;
    o.pass = std::abs(z) <= 3.0;
    o.detail = "value " + fmt("%.6f", v) + " MC " + fmt("%.6f", out.J_stat.mean) + " +- " +
               fmt("%.6f", out.J_stat.stderr_) + " z=" + fmt("%.2f", z);
    return o;
}

// ---- 5: best-response perturbations ----
Outcome best_response() {
    EquilibriumSolution sol = solve_game(scalar_spec(moderate_instance(), 200), 1e-8, true);
    SimConfig cfg;
    cfg.paths = 10000;
    cfg.seed = 1;
    PerturbationReport r = perturb_best_response(sol, cfg, 20, {0.0, 0.05, 0.1});
    int pass = 0, fail = 0, inc = 0;
    bool null_exact = true;
    for (const auto& row : r.rows) {
        if (row.eps == 0.0) null_exact = null_exact && row.delta_j == 0.0;
        if (row.verdict == "pass") ++pass;
        else if (row.verdict == "fail") ++fail;
        else ++inc;
    }
    Outcome o;
    o.pass = r.rows.size() == 240 && fail == 0 && inc == 0 && null_exact;
    o.detail = std::to_string(r.rows.size()) + " rows: " + std::to_string(pass) + " pass " + std::to_string(fail) +
               " fail " + std::to_string(inc) + " inconclusive, null test " + (null_exact ? "exact" : "NOT exact");
    return o;
}

// ---- 6: two-point boundary-value discretization vs Riccati decoupling ----
Outcome bvp_equivalence() {
    EquilibriumSolution sol = solve_game(scalar_spec(mild_instance(), 128));
    double g64 = max_relative_gap(skeleton_pipeline(sol, 64), bvp_oracle(sol, 64));
    double g128 = max_relative_gap(skeleton_pipeline(sol, 128), bvp_oracle(sol, 128));
    Outcome o;
    o.pass = g64 <= 1e-3 && g128 <= 0.6 * g64;
    o.detail = "gap N=64 " + fmt("%.3e", g64) + ", N=128 " + fmt("%.3e", g128) + " ratio " + fmt("%.3f", g128 / g64);
    return o;
}

// ---- 7: invariants ----
Outcome invariants() {
    std::vector<std::string> bad;
    std::ostringstream info;
    GameSpec s = scalar_spec(production_style(), 64);
    EquilibriumSolution sol = solve_game(s);
    const int N = s.grid.N;
    if (!(sol.P.P.node(N) == s.G)) bad.push_back("P(T)");
    if (!(sol.P1.P.node(N) == -s.G)) bad.push_back("P1(T)");
    if (!(sol.Phat.P.node(N) == sol.stages_at(s.grid.T, N).dh.G)) bad.push_back("Phat(T)");
    if (sol.psi.node(N).norm() != 0.0) bad.push_back("psi(T)");

    std::mt19937_64 rng(5);
    double asym = 0.0;
    for (int i = 0, ok = 0; ok < 4 && i < 50; ++i) {
        GameSpec r = random_spec(rng, 2 + i % 2, false, 100);
        try {
            MatrixPath P = solve_riccati_follower(r).P, P1 = solve_riccati_R1(r).P;
            for (int k = 0; k <= 100; ++k) {
                asym = std::max(asym, maxabs(P.node(k) - P.node(k).transpose()));
                asym = std::max(asym, maxabs(P1.node(k) - P1.node(k).transpose()));
            }
            ++ok;
        } catch (const SolverError&) {
        }
    }
    if (asym > 1e-10) bad.push_back("symmetry");
    info << "asym " << fmt("%.1e", asym);

    // order ratios at N = 16, 32, 64
    Mat p[3], p1[3], ph[3];
    for (int i = 0; i < 3; ++i) {
        EquilibriumSolution e = solve_game(regrid(s, 16 << i));
        p[i] = e.P.P.node(0);
        p1[i] = e.P1.P.node(0);
        ph[i] = e.Phat.P.node(0);
    }
    auto ratio = [](const Mat* m) { return maxabs(m[0] - m[1]) / maxabs(m[1] - m[2]); };
    for (auto [name, r] : {std::pair{"P", ratio(p)}, std::pair{"P1", ratio(p1)}, std::pair{"Phat", ratio(ph)}}) {
        info << " ratio " << name << " " << fmt("%.2f", r);
        if (!(r >= 12.0 && r <= 20.0)) bad.push_back(std::string("order ") + name);
    }

    SimConfig cfg;
    cfg.paths = 2000;
    cfg.seed = 9;
    SimOutput a = simulate(sol, cfg), b = simulate(sol, cfg);
    cfg.parallel = false;
    SimOutput c = simulate(sol, cfg);
    if (!(a.J == b.J && a.J == c.J && a.Jf == c.Jf && a.Jtf == c.Jtf)) bad.push_back("seed determinism");

    EquilibriumSolution h = solve_game(homogeneous_game(2, 0.0, 40));
    double zmax = std::abs(value(h));
    for (int k = 0; k <= 40; ++k)
        zmax = std::max({zmax, h.phihat.node(k).norm(), h.phiM1.node(k).norm(), h.phiM2.node(k).norm(),
                         h.psi.node(k).norm()});
    SimOutput hz = simulate(h, cfg);
    zmax = std::max({zmax, std::abs(hz.J_stat.mean), hz.terminal_mean.norm()});
    if (zmax != 0.0) bad.push_back("zero propagation");
    info << " zero max " << zmax;

    Outcome o;
    o.pass = bad.empty();
    o.detail = info.str();
    for (auto& x : bad) o.detail += " FAILED:" + x;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    // optional list of criterion numbers to run
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    const std::pair<const char*, std::function<Outcome()>> crit[] = {
        {"production example trajectory", production_example_bode},
        {"Riccati residuals on random specs", riccati_residuals_random},
        {"closed form in the special case", special_case_equivalence},
        {"Monte Carlo vs value function", value_oracle},
        {"best-response perturbations", best_response},
        {"boundary-value oracle", bvp_equivalence},
        {"invariant suite", invariants},
    };
    int failed = 0;
    for (int i = 0; i < 7; ++i) {
        if (!only.empty() && std::find(only.begin(), only.end(), i + 1) == only.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = crit[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s: %s (%s; %.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL", crit[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
