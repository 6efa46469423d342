#pragma once

#include "rsg/model.hpp"

#include <map>
#include <string>
#include <utility>

namespace rsg {

enum class Stage { hat, check, blackboard, doublehat };
const char* stage_name(Stage s);
Stage parse_stage(const std::string& s);

using NamedBlocks = std::vector<std::pair<std::string, Mat>>;

// 2n follower system
struct HatBlocks {
    Mat A1, A2, C, B1, B2, B3, D1, D2, D3, b, sigma, v, F, Q, G, xi;
    NamedBlocks named() const;
};

// 3n forward / 2n backward leader system
struct CheckBlocks {
    Mat A, C, B1, B2, B3, D1, D2, D3, F1, sigma, Q, G, Qbar, Gbar, I, xi;
    NamedBlocks named() const;
};

// 5n stacked system
struct BlackboardBlocks {
    Mat A, C, B1, B2, B3, D1, D2, D3, F1, F2, Sigma, Xi, Ups, Q, G;
    NamedBlocks named() const;
};

struct LeaderCostWeights {
    Mat Rt, Rti, S;  // R1 + D1'PD1, its inverse, PB1 + C'PD1
    Mat R, RR, RRi;  // Rt^-1 R1 Rt^-1, R2 + D2'PD1 R D1'PD2, inverse
    Mat Qbb, Bbb, Dbb, Gbb;
    Mat S1, S2, S3, M1, M2, M3, L1, L2, L3;
    Mat rho;  // D2'PD1 R D1'P sigma
    NamedBlocks named() const;
};

// 10n Hamiltonian system
struct DoubleHatBlocks {
    Mat A1, A2, C1, C2, B1, B2, D1, D2, Q, F, Sigma, Ups, Xi, G;
    NamedBlocks named() const;
};

struct StagePack {
    HatBlocks hat;
    CheckBlocks check;
    BlackboardBlocks bb;
    LeaderCostWeights w;
    DoubleHatBlocks dh;
};

// pointwise builders; P is the follower Riccati value at t, node only labels errors
HatBlocks build_hat(const GameSpec& s, const Coeffs& c, const Mat& P, double delta = 1e-8, int node = -1);
CheckBlocks build_check(const GameSpec& s, const Coeffs& c, const Mat& P, double delta = 1e-8, int node = -1);
BlackboardBlocks build_blackboard(const CheckBlocks& ck, const HatBlocks& hat, double gamma, const Mat& R0hat);
LeaderCostWeights build_cost_weights(const GameSpec& s, const Coeffs& c, const Mat& P, double delta = 1e-8,
                                     int node = -1);
DoubleHatBlocks build_doublehat(const BlackboardBlocks& bb, const LeaderCostWeights& w, const Mat& sigma,
                                int node = -1);

StagePack build_stages(const GameSpec& s, double t, const Mat& P, double delta = 1e-8, int node = -1);

// path form: every block sampled at the grid nodes of P
struct StageCoefficients {
    Stage tag;
    std::map<std::string, MatrixPath> blocks;
};
StageCoefficients stage_paths(const GameSpec& s, const MatrixPath& P, Stage tag, double delta = 1e-8);

// n x 10n block-row picking n-block i (1-based)
Mat block_selector(int n, int i, int nblocks = 10);

struct SelectorSet {
    Mat M1, M2, M3, M4, M5, M6, M7;
};
SelectorSet selectors(int n);

// positions of named components in the 10n stacks
namespace comp {
constexpr int x = 1;      // X: leader state
constexpr int xbar = 2;   // X: follower state
constexpr int xhat_tilde_bar = 9;  // X
constexpr int ybar = 9;   // Y: follower adjoint of xbar
constexpr int pbar = 10;  // Y: disturbance adjoint
constexpr int xtilde = 6; // Y
constexpr int zbar = 9;   // Z
}  // namespace comp

struct GainPoint {
    Mat PM1, PM2, phiM1, phiM2;
    Mat Rti, RRi, R;
    Mat Ff, Ff2;    // f = Ff Y, f2 = Ff2 Y with Y = Phat X + phihat
    Mat W, Zc, Zo;  // Z = Zc X + Zo
};

GainPoint build_gain_maps(const GameSpec& s, const Coeffs& c, const Mat& P, const Mat& Phat, const StagePack& st,
                          const Mat& phihat, double delta = 1e-8, int node = -1);

// the leader control read straight off the Hamiltonian system components
Mat u2_from_components(const Coeffs& c, const Mat& P, const LeaderCostWeights& w, const Mat& X, const Mat& Y,
                       const Mat& Z);

}  // namespace rsg
