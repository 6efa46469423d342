#pragma once

#include "rsg/equilibrium.hpp"

#include <cstdint>
#include <random>

namespace rsg {

struct SimConfig {
    long paths = 10000;
    std::uint64_t seed = 1;
    int substeps = 1;
    bool parallel = true;
    bool noise = true;
    bool keep_terminal = false;
};

struct Stat {
    double mean = 0.0;
    double stderr_ = 0.0;
};
Stat mean_stderr(const std::vector<double>& v);

struct SimOutput {
    std::vector<double> J, Jf, Jtf;
    std::vector<Vec> terminal;  // only with keep_terminal
    Stat J_stat, Jf_stat, Jtf_stat;
    Vec terminal_mean, terminal_var;
    long blown = 0;
};

// per-path generator, independent of the schedule
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t stream);

// per-step coefficients of the closed loop and of the four strategies
struct SimPlan {
    int n = 1, d = 10, m1 = 1, m2 = 1;
    int steps = 1;
    double T = 1.0, h = 1.0;
    double alpha = 1.0, gamma = 1.0;
    Vec X0;
    std::vector<Mat> A, C;
    std::vector<Vec> B, D;
    std::vector<Mat> K1, K2, Kf, Kf2;  // u1 = K1 X + k1, ...
    std::vector<Vec> k1, k2, kf, kf2;
    std::vector<Coeffs> coef;
    Mat G;
    bool with_costs = true;
    double t(int k) const { return k == steps ? T : k * h; }
};

SimPlan make_plan(const EquilibriumSolution& sol, int substeps);
// linear SDE only, strategies zero; for moment tests
SimPlan make_linear_plan(const Mat& A, const Vec& B, const Mat& C, const Vec& D, const Vec& X0, double T, int steps);

SimOutput simulate(const EquilibriumSolution& sol, const SimConfig& cfg);
SimOutput simulate_plan(const SimPlan& plan, const SimConfig& cfg);

// ---- best-response perturbation tests ----

struct PerturbationRow {
    std::string test;
    int direction;
    double eps;
    double delta_j;
    double stderr_;
    std::string verdict;
};

struct PerturbationReport {
    std::vector<PerturbationRow> rows;
    bool all_pass() const;
    void write_csv(std::ostream& os) const;
};

// random piecewise-constant path with unit L2 norm on [0,T]
struct Direction {
    double T = 1.0;
    std::vector<Vec> pieces;
    Vec operator()(double t) const;
    static Direction random(int dim, double T, int pieces, std::mt19937_64& rng);
    static Direction zero(int dim, double T);
};

// direction j of a test kind (0 follower, 1 leader, 2 follower_disturbance, 3 leader_disturbance)
Direction perturbation_direction(std::uint64_t seed, int kind, int j, int dim, double T, int pieces = 8);

std::string verdict(bool minimizer, double eps, double dj, double se);

PerturbationReport perturb_best_response(const EquilibriumSolution& sol, const SimConfig& cfg, int directions,
                                         const std::vector<double>& eps, int pieces = 8);

// ---- sampled convexity functionals ----

double J1p(const GameSpec& s, const Direction& h);
double J2p(const GameSpec& s, const Direction& g);
double J1pp(const GameSpec& s, const MatrixPath& P1, const Direction& v);
double J2pp(const GameSpec& s, const MatrixPath& P, const MatrixPath& P3, const Direction& v, double delta = 1e-8);

PerturbationReport sampled_convexity(const GameSpec& s, const MatrixPath& P, const MatrixPath& P1,
                                     const MatrixPath& P3, int samples, std::uint64_t seed, double delta = 1e-8);

// ---- two-point boundary-value oracle on the noise-free skeleton ----

struct Trajectories {
    TimeGrid grid;
    std::vector<Vec> X, Y;
};

Trajectories bvp_oracle(const EquilibriumSolution& sol, int N);
// Riccati decoupling of the same skeleton, sampled at the N+1 coarse nodes
Trajectories skeleton_pipeline(const EquilibriumSolution& sol, int N);
double max_relative_gap(const Trajectories& a, const Trajectories& b);

}  // namespace rsg
