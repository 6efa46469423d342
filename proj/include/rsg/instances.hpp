#pragma once

#include "rsg/model.hpp"

#include <random>

namespace rsg {

// constant-coefficient scalar game
struct ScalarGame {
    double A = 0.0, C = 0.0, B1 = 1.0, B2 = 1.0, D1 = 0.0, D2 = 0.0;
    double Q = 1.0, G = 1.0, R1 = 1.0, R2 = -1.0, R0 = 1.0, R0hat = 1.0;
    double sigma = 0.0, f1 = 0.0, xi = 1.0;
    double alpha = 4.0, gamma = 4.0, T = 1.0;
};

GameSpec scalar_spec(const ScalarGame& p, int N);

// indefinite R1, noisy, used by the Monte Carlo and perturbation tests
ScalarGame production_style();
// definite R1 with full noise loading; light enough tails for 1e5-path means
ScalarGame moderate_instance();
// weak coupling, used by the boundary-value comparison
ScalarGame mild_instance();
// producer game with A = 1 - a, C = c, unit control loadings
ScalarGame production_example(double a, double c, double q, double g, double r1, double r2, double T);

// Q = 0, G = 0, sigma = 0, f1 = 0
GameSpec homogeneous_game(int n, double xi, int N);

// constant coefficients, n x n with m1 = m2 = 1; special zeroes C, D1, D2.
// Not every draw is solvable; callers retry on SolverError.
GameSpec random_spec(std::mt19937_64& rng, int n, bool special, int N);

}  // namespace rsg
