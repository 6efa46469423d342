#pragma once

#include "rsg/model.hpp"

#include <functional>
#include <iosfwd>

namespace rsg {

// dP/dt as a function of (t, P)
using BackwardRhs = std::function<Mat(double, const Mat&)>;

// classical RK4 from T down to 0; the result interpolates with cubic Hermite
// using rhs values at the nodes
MatrixPath integrate_backward(const BackwardRhs& rhs, const Mat& terminal, const TimeGrid& grid,
                              const std::string& stage = "backward");

// forward counterpart, value at t=0 given
MatrixPath integrate_forward(const BackwardRhs& rhs, const Mat& initial, const TimeGrid& grid,
                             const std::string& stage = "forward");

// coefficients of
//   P' + P A1 + A2'P + P B1 P - Q + (C2' + P B2)(I - P D2)^-1 (P C1 + P D1 P) = 0
struct RiccatiCoefficients {
    Mat A1, A2, B1, Q;
    bool fraction = false;
    Mat C1, C2, B2, D1, D2;
};

struct RiccatiProblem {
    int d = 0;
    std::function<RiccatiCoefficients(double)> coef;
    Mat Pterm;
    TimeGrid grid;
    std::string stage = "riccati";

    // constant or time-varying coefficients given as paths
    static RiccatiProblem from_paths(const MatrixPath& A1, const MatrixPath& A2, const MatrixPath& B1,
                                     const MatrixPath& Q, const Mat& Pterm);
};

struct RegularityLog {
    std::string name;
    std::vector<double> min_eig, max_eig;
};

struct RiccatiSolution {
    MatrixPath P;
    std::vector<RegularityLog> log;
};

Mat riccati_rhs(const RiccatiCoefficients& c, const Mat& P);

RiccatiSolution solve_riccati_follower(const GameSpec& spec, double delta = 1e-8);
RiccatiSolution solve_riccati_R1(const GameSpec& spec);
RiccatiSolution solve_riccati_generalized(const RiccatiProblem& prob, double delta = 1e-8);

// inhomogeneous parts of the linear backward offset equation paired with a
// generalized Riccati problem: drift source F, diffusion source Sigma and
// backward source Ups, each d x 1
struct OffsetSources {
    Mat F, Sigma, Ups;
};
using OffsetSourceFn = std::function<OffsetSources(double)>;

struct OffsetSolution {
    MatrixPath phi;
};

OffsetSolution solve_offset(const RiccatiProblem& prob, const MatrixPath& P, const OffsetSourceFn& src);

// follower-side disturbance offset with given deterministic u1, u2
OffsetSolution solve_offset_R1(const GameSpec& spec, const MatrixPath& P1, const std::function<Mat(double)>& u1,
                               const std::function<Mat(double)>& u2, bool with_sigma = true);

// L' + L At + At'L + Ct'L Ct + source = 0
MatrixPath solve_lyapunov(const std::function<Mat(double)>& Atil, const std::function<Mat(double)>& Ctil,
                          const std::function<Mat(double)>& source, const Mat& terminal, const TimeGrid& grid);

// psi' + At'psi + L Bt + Ct'L Dt + source = 0, psi(T) = 0
OffsetSolution solve_value_offset(const std::function<Mat(double)>& Atil, const std::function<Mat(double)>& Ctil,
                                  const std::function<Mat(double)>& Btil, const std::function<Mat(double)>& Dtil,
                                  const MatrixPath& L, const std::function<Mat(double)>& source,
                                  const TimeGrid& grid);

// fundamental-matrix solution for problems without the fraction term
RiccatiSolution closed_form_special_case(const RiccatiProblem& prob);

// node residual of the unified equation, derivative by finite differences
std::vector<double> riccati_residuals(const RiccatiProblem& prob, const MatrixPath& P);

// five-point finite-difference derivative of the node samples
std::vector<Mat> node_derivatives(const MatrixPath& p);

void write_csv(std::ostream& os, const MatrixPath& p, const std::string& name = "p");

}  // namespace rsg
