#pragma once

#include "rsg/augment.hpp"
#include "rsg/backward.hpp"

#include <optional>

namespace rsg {

struct ClosedLoop {
    Mat At, Bt, Ct, Dt;
};

struct EquilibriumSolution {
    GameSpec spec;
    double delta = 1e-8;
    RiccatiSolution P, P1, Phat;
    MatrixPath phihat, L, psi;
    MatrixPath PM1, PM2, phiM1, phiM2;
    MatrixPath Atil, Btil, Ctil, Dtil;
    std::optional<RiccatiSolution> P2, P3;

    StagePack stages_at(double t, int node = -1) const;
    GainPoint gains_at(double t, int node = -1) const;
    ClosedLoop closed_loop_at(double t) const;
    ClosedLoop closed_loop_at(double t, const StagePack& st, const GainPoint& g) const;
};

// the four generalized Riccati problems, coefficients rebuilt pointwise from P
RiccatiProblem r2_problem(const GameSpec& s, const MatrixPath& P, double delta = 1e-8);
RiccatiProblem r3_problem(const GameSpec& s, const MatrixPath& P, double delta = 1e-8);
RiccatiProblem r4_problem(const GameSpec& s, const MatrixPath& P, double delta = 1e-8);
// R-4 with every diffusion block dropped
RiccatiProblem r4_skeleton_problem(const GameSpec& s, const MatrixPath& P, double delta = 1e-8);

EquilibriumSolution solve_game(const GameSpec& spec, double delta = 1e-8, bool diagnostics = false);

struct StrategyOutput {
    Vec u1, u2, f, f2;
};

StrategyOutput feedback(const EquilibriumSolution& sol, const Vec& Xhat, double t);
StrategyOutput clamp_nonnegative(const StrategyOutput& s);

double value(const EquilibriumSolution& sol);

MatrixPath scalar_bode(double a, double c, double q, double g, double r1, double T, int N, double delta = 1e-8);

}  // namespace rsg
