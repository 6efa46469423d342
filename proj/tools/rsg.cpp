#include "rsg/instances.hpp"
#include "rsg/montecarlo.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

using json = nlohmann::json;
using namespace rsg;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kBadInput = 1, kSolver = 2, kVerify = 3;

struct VerificationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json mat_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

fs::path out_dir(const std::string& out) {
    fs::path p(out);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw SpecError("cannot create output directory " + out + ": " + ec.message());
    return p;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw SpecError("cannot write " + p.string());
    return os;
}

void write_json(const fs::path& p, const json& j) {
    auto os = open_out(p);
    os << std::setw(2) << j << '\n';
}

void write_path(const fs::path& dir, const std::string& file, const MatrixPath& p, const std::string& name) {
    auto os = open_out(dir / file);
    write_csv(os, p, name);
}

void echo(const json& cfg) { std::cout << "config " << cfg.dump() << std::endl; }

json regularity(const EquilibriumSolution& sol) {
    json r = json::object();
    auto add = [&](const std::string& stage, const RiccatiSolution& rs) {
        for (const auto& lg : rs.log) {
            auto it = std::min_element(lg.min_eig.begin(), lg.min_eig.end());
            r[stage + ": " + lg.name] = {{"min", *it}, {"node", it - lg.min_eig.begin()}};
        }
    };
    add("(riccati)", sol.P);
    add("(R-4)", sol.Phat);
    if (sol.P2) add("(R-2)", *sol.P2);
    if (sol.P3) add("(R-3)", *sol.P3);
    double worst = -std::numeric_limits<double>::infinity();
    int at = 0;
    for (int k = 0; k <= sol.spec.grid.N; ++k) {
        double e = max_eig_sym(sol.stages_at(sol.spec.grid.t(k), k).w.RR);
        if (e > worst) {
            worst = e;
            at = k;
        }
    }
    r["leader weight: max eigenvalue"] = {{"max", worst}, {"node", at}};
    return r;
}

int cmd_solve(const std::string& spec_file, const std::string& out, std::optional<int> grid_n, double delta,
              bool diagnostics) {
    GameSpec s = load_spec(spec_file, grid_n);
    echo({{"command", "solve"}, {"spec", spec_file}, {"out", out}, {"grid_n", s.grid.N}, {"delta", delta},
          {"diagnostics", diagnostics}});
    EquilibriumSolution sol = solve_game(s, delta, diagnostics);
    const double V = value(sol);
    fs::path dir = out_dir(out);
    write_path(dir, "P.csv", sol.P.P, "p");
    write_path(dir, "P1.csv", sol.P1.P, "p");
    write_path(dir, "Phat.csv", sol.Phat.P, "p");
    write_path(dir, "phihat.csv", sol.phihat, "phi");
    write_path(dir, "L.csv", sol.L, "l");
    write_path(dir, "psi.csv", sol.psi, "psi");
    write_path(dir, "PM1.csv", sol.PM1, "g");
    write_path(dir, "PM2.csv", sol.PM2, "g");
    write_path(dir, "phiM1.csv", sol.phiM1, "g");
    write_path(dir, "phiM2.csv", sol.phiM2, "g");
    if (sol.P2) write_path(dir, "P2.csv", sol.P2->P, "p");
    if (sol.P3) write_path(dir, "P3.csv", sol.P3->P, "p");

    json gains = json::array();
    const TimeGrid& g = s.grid;
    const int stride = std::max(1, g.N / 10);
    for (int k = 0; k <= g.N; k += stride) {
        gains.push_back({{"t", g.t(k)},
                         {"PM1", mat_json(sol.PM1.node(k))},
                         {"PM2", mat_json(sol.PM2.node(k))},
                         {"offsets", {{"phiM1", mat_json(sol.phiM1.node(k))}, {"phiM2", mat_json(sol.phiM2.node(k))}}}});
        if (k != g.N && k + stride > g.N) k = g.N - stride;
    }
    json summary = {{"value", V}, {"regularity", regularity(sol)}, {"gains_at", gains}};
    write_json(dir / "summary.json", summary);
    std::cout << "value " << std::setprecision(17) << V << std::endl;
    return kOk;
}

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"stderr", s.stderr_}}; }

int cmd_simulate(const std::string& spec_file, const std::string& out, std::optional<int> grid_n, double delta,
                 const SimConfig& cfg, bool per_path) {
    GameSpec s = load_spec(spec_file, grid_n);
    echo({{"command", "simulate"}, {"spec", spec_file}, {"out", out}, {"grid_n", s.grid.N}, {"delta", delta},
          {"paths", cfg.paths}, {"seed", cfg.seed}, {"substeps", cfg.substeps}, {"per_path", per_path}});
    EquilibriumSolution sol = solve_game(s, delta);
    SimConfig c = cfg;
    c.keep_terminal = per_path;
    SimOutput o = simulate(sol, c);
    fs::path dir = out_dir(out);
    std::vector<double> tm(o.terminal_mean.data(), o.terminal_mean.data() + o.terminal_mean.size());
    std::vector<double> tv(o.terminal_var.data(), o.terminal_var.data() + o.terminal_var.size());
    json j = {{"J", stat_json(o.J_stat)},     {"J_f", stat_json(o.Jf_stat)},   {"J_tilde_f", stat_json(o.Jtf_stat)},
              {"value", value(sol)},          {"paths", cfg.paths},            {"blown", o.blown},
              {"terminal_mean", tm},          {"terminal_var", tv}};
    write_json(dir / "sim.json", j);
    if (per_path) {
        auto os = open_out(dir / "paths.csv");
        os << std::setprecision(17) << "path,J,J_f,J_tilde_f";
        for (int i = 0; i < o.terminal_mean.size(); ++i) os << ",X_" << i + 1;
        os << '\n';
        for (std::size_t p = 0; p < o.J.size(); ++p) {
            os << p << ',' << o.J[p] << ',' << o.Jf[p] << ',' << o.Jtf[p];
            for (int i = 0; i < o.terminal[p].size(); ++i) os << ',' << o.terminal[p][i];
            os << '\n';
        }
    }
    std::cout << std::setprecision(10) << "J " << o.J_stat.mean << " +- " << o.J_stat.stderr_ << "  value "
              << value(sol) << std::endl;
    return kOk;
}

int cmd_verify(const std::string& spec_file, const std::string& out, std::optional<int> grid_n, double delta,
               const SimConfig& cfg, double eps, int directions, int samples, int oracle_n, double gap_tol) {
    GameSpec s = load_spec(spec_file, grid_n);
    echo({{"command", "verify"}, {"spec", spec_file}, {"out", out}, {"grid_n", s.grid.N}, {"delta", delta},
          {"paths", cfg.paths}, {"seed", cfg.seed}, {"substeps", cfg.substeps}, {"eps", eps},
          {"directions", directions}, {"samples", samples}, {"oracle_n", oracle_n}, {"gap_tol", gap_tol}});
    fs::path dir = out_dir(out);
    ValidationReport rep = validate_spec(s, delta);
    json checks = json::array();
    for (const auto& c : rep.checks) {
        json e = {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}};
        if (c.node) e["node"] = *c.node;
        checks.push_back(e);
    }
    json j = {{"validation", checks}};
    if (!rep.ok()) {
        write_json(dir / "verify.json", j);
        throw SpecError("spec validation failed:\n" + rep.summary());
    }
    EquilibriumSolution sol = solve_game(s, delta, true);

    PerturbationReport pr = perturb_best_response(sol, cfg, directions, {0.0, eps});
    {
        auto os = open_out(dir / "perturbation.csv");
        pr.write_csv(os);
    }
    PerturbationReport cx = sampled_convexity(s, sol.P.P, sol.P1.P, sol.P3->P, samples, cfg.seed, delta);
    {
        auto os = open_out(dir / "convexity.csv");
        cx.write_csv(os);
    }
    json cmin = json::object();
    for (const auto& r : cx.rows)
        if (!cmin.contains(r.test) || r.delta_j < cmin[r.test].get<double>()) cmin[r.test] = r.delta_j;

    const double gap = max_relative_gap(bvp_oracle(sol, oracle_n), skeleton_pipeline(sol, oracle_n));
    long failed = 0;
    for (const auto& r : pr.rows) failed += r.verdict != "pass";
    j["perturbation"] = {{"rows", pr.rows.size()}, {"not_pass", failed}};
    j["convexity_min"] = cmin;
    j["oracle_gap"] = {{"N", oracle_n}, {"gap", gap}, {"tol", gap_tol}};
    const bool ok = pr.all_pass() && cx.all_pass() && gap <= gap_tol;
    j["verdict"] = ok ? "pass" : "fail";
    write_json(dir / "verify.json", j);
    std::cout << "perturbation rows " << pr.rows.size() << " not passing " << failed << "; oracle gap "
              << std::setprecision(6) << gap << "; verdict " << (ok ? "pass" : "fail") << std::endl;
    if (!ok) throw VerificationFailed("verification failed");
    return kOk;
}

int cmd_example(double a, double c, double q, double g, double r1, double r2, double alpha, double gamma, double T,
                int N, const std::string& out, double delta) {
    echo({{"command", "example"}, {"a", a}, {"c", c}, {"q", q}, {"g", g}, {"r1", r1}, {"r2", r2}, {"alpha", alpha},
          {"gamma", gamma}, {"T", T}, {"N", N}, {"out", out}, {"delta", delta}});
    fs::path dir = out_dir(out);
    MatrixPath P = scalar_bode(a, c, q, g, r1, T, N, delta);
    write_path(dir, "bode.csv", P, "p");
    std::cout << "P(0) " << std::setprecision(12) << P.node(0)(0, 0) << std::endl;

    ScalarGame p = production_example(a, c, q, g, r1, r2, T);
    p.alpha = alpha;
    p.gamma = gamma;
    EquilibriumSolution sol = solve_game(scalar_spec(p, N), delta);
    const TimeGrid& tg = sol.spec.grid;
    // noise-free skeleton of the closed loop
    Mat X = sol.stages_at(0.0, 0).dh.Xi;
    auto os = open_out(dir / "strategies.csv");
    os << std::setprecision(17) << "t,u1,u2,u1_clamped,u2_clamped,f,f2,f1_implied\n";
    for (int k = 0; k <= tg.N; ++k) {
        const double t = tg.t(k);
        StrategyOutput raw = feedback(sol, X, t);
        StrategyOutput cl = clamp_nonnegative(raw);
        os << t << ',' << raw.u1[0] << ',' << raw.u2[0] << ',' << cl.u1[0] << ',' << cl.u2[0] << ',' << raw.f[0] << ','
           << raw.f2[0] << ',' << raw.f[0] - raw.f2[0] << '\n';
        if (k < tg.N) X = X + tg.dt() * (sol.Atil.node(k) * X + sol.Btil.node(k));
    }
    write_json(dir / "summary.json", {{"P0", P.node(0)(0, 0)}, {"value", value(sol)}, {"regularity", regularity(sol)}});
    return kOk;
}

int cmd_dump(const std::string& spec_file, std::optional<int> grid_n, double delta, const std::string& stage,
             int node, const std::string& out) {
    GameSpec s = load_spec(spec_file, grid_n);
    echo({{"command", "dump-blocks"}, {"spec", spec_file}, {"grid_n", s.grid.N}, {"delta", delta}, {"stage", stage},
          {"node", node}, {"out", out}});
    Stage tag = parse_stage(stage);
    if (node < 0 || node > s.grid.N) throw SpecError("node out of range 0.." + std::to_string(s.grid.N));
    ValidationReport rep = validate_spec(s, delta);
    if (!rep.ok()) throw SpecError("spec validation failed:\n" + rep.summary());
    RiccatiSolution P = solve_riccati_follower(s, delta);
    const double t = s.grid.t(node);
    StagePack st = build_stages(s, t, P.P.node(node), delta, node);
    NamedBlocks nb;
    switch (tag) {
        case Stage::hat: nb = st.hat.named(); break;
        case Stage::check: nb = st.check.named(); break;
        case Stage::blackboard:
            nb = st.bb.named();
            for (auto& e : st.w.named()) nb.push_back(e);
            break;
        case Stage::doublehat: nb = st.dh.named(); break;
    }
    json blocks = json::object();
    for (const auto& [name, m] : nb) blocks[name] = mat_json(m);
    json j = {{"stage", stage_name(tag)}, {"node", node}, {"t", t}, {"blocks", blocks}};
    if (out.empty()) {
        std::cout << std::setw(2) << j << std::endl;
    } else {
        fs::path p(out);
        if (p.has_parent_path()) out_dir(p.parent_path().string());
        write_json(p, j);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust Stackelberg LQ game solver"};
    app.require_subcommand(1);

    std::string spec, out = "out", stage = "hat";
    int grid_n = 0, node = 0;
    double delta = 1e-8;
    SimConfig cfg;
    cfg.paths = 10000;
    double eps = 0.05;
    int directions = 20, samples = 5, oracle_n = 64;
    double gap_tol = 1e-3;
    bool diagnostics = false, per_path = false;

    auto common = [&](CLI::App* sc) {
        sc->add_option("--spec", spec, "game JSON file")->required()->check(CLI::ExistingFile);
        sc->add_option("--grid-n", grid_n, "grid steps (default: from spec, else 1000)")->check(CLI::PositiveNumber);
        sc->add_option("--delta", delta, "regularity margin")->capture_default_str();
    };
    auto sim_opts = [&](CLI::App* sc) {
        sc->add_option("--paths", cfg.paths, "Monte Carlo paths")->capture_default_str()->check(CLI::PositiveNumber);
        sc->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
        sc->add_option("--substeps", cfg.substeps, "Euler steps per grid interval")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the equilibrium and write paths");
    common(solve);
    solve->add_option("--out", out, "output directory")->capture_default_str();
    solve->add_flag("--diagnostics", diagnostics, "also solve the two diagnostic Riccati equations");

    CLI::App* simc = app.add_subcommand("simulate", "Monte Carlo of the closed loop");
    common(simc);
    sim_opts(simc);
    simc->add_option("--out", out, "output directory")->capture_default_str();
    simc->add_flag("--per-path", per_path, "write per-path costs and terminal states");

    CLI::App* ver = app.add_subcommand("verify", "validation, perturbation tests, convexity samples, oracle gap");
    common(ver);
    sim_opts(ver);
    ver->add_option("--out", out, "output directory")->capture_default_str();
    ver->add_option("--eps", eps, "perturbation size")->capture_default_str();
    ver->add_option("--directions", directions, "directions per test")->capture_default_str()->check(CLI::PositiveNumber);
    ver->add_option("--samples", samples, "convexity samples")->capture_default_str()->check(CLI::PositiveNumber);
    ver->add_option("--oracle-n", oracle_n, "oracle grid")->capture_default_str()->check(CLI::PositiveNumber);
    ver->add_option("--gap-tol", gap_tol, "oracle gap tolerance")->capture_default_str();

    double a = 0.5, c = -1.0, q = 1.0, g = 1.0, r1 = -0.5, r2 = 0.2, alpha = 100.0, gamma = 100.0, T = 2.0;
    int N = 2000;
    CLI::App* ex = app.add_subcommand("example", "producer game: bode trajectory and clamped strategies");
    ex->add_option("--a", a)->capture_default_str();
    ex->add_option("--c", c)->capture_default_str();
    ex->add_option("--q", q)->capture_default_str();
    ex->add_option("--g", g)->capture_default_str();
    ex->add_option("--r1", r1)->capture_default_str();
    ex->add_option("--r2", r2)->capture_default_str();
    ex->add_option("--alpha", alpha)->capture_default_str();
    ex->add_option("--gamma", gamma)->capture_default_str();
    ex->add_option("--T", T)->capture_default_str();
    ex->add_option("--N", N)->capture_default_str()->check(CLI::PositiveNumber);
    ex->add_option("--out", out, "output directory")->capture_default_str();
    ex->add_option("--delta", delta, "regularity margin")->capture_default_str();

    std::string dump_out;
    CLI::App* dump = app.add_subcommand("dump-blocks", "stage coefficients at one node as JSON");
    common(dump);
    dump->add_option("--stage", stage, "hat|check|blackboard|doublehat")->capture_default_str();
    dump->add_option("--node", node, "grid node")->capture_default_str();
    dump->add_option("--out", dump_out, "JSON file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kBadInput;
    }

    std::optional<int> gn;
    if (grid_n > 0) gn = grid_n;
    try {
        if (*solve) return cmd_solve(spec, out, gn, delta, diagnostics);
        if (*simc) return cmd_simulate(spec, out, gn, delta, cfg, per_path);
        if (*ver) return cmd_verify(spec, out, gn, delta, cfg, eps, directions, samples, oracle_n, gap_tol);
        if (*ex) return cmd_example(a, c, q, g, r1, r2, alpha, gamma, T, N, out, delta);
        if (*dump) return cmd_dump(spec, gn, delta, stage, node, dump_out);
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kBadInput;
    } catch (const SolverError& e) {
        std::cerr << "solver failure " << e.what() << std::endl;
        return kSolver;
    } catch (const VerificationFailed& e) {
        std::cerr << e.what() << std::endl;
        return kVerify;
    }
    return kBadInput;
}
