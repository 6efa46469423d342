#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// bad input data: exit code 1 in the CLI
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// solver or regularity failure: exit code 2 in the CLI
struct SolverError : std::runtime_error {
    std::string stage;
    int node;
    SolverError(std::string stage_, int node_, const std::string& msg);
};

struct TimeGrid {
    double T = 1.0;
    int N = 1;

    double dt() const { return T / N; }
    double t(int k) const { return k == N ? T : k * (T / N); }
    std::vector<double> nodes() const;
};

TimeGrid make_grid(double T, int N);

class MatrixPath {
public:
    MatrixPath() = default;
    MatrixPath(TimeGrid g, std::vector<Mat> samples);
    // cubic Hermite between nodes, derivs are d/dt at the nodes
    MatrixPath(TimeGrid g, std::vector<Mat> samples, std::vector<Mat> derivs);
    static MatrixPath constant(TimeGrid g, const Mat& m);
    static MatrixPath zeros(TimeGrid g, int rows, int cols);

    Mat operator()(double t) const;
    const Mat& node(int k) const;
    const Mat& deriv(int k) const { return derivs_.at(k); }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const TimeGrid& grid() const { return grid_; }
    bool is_constant() const { return constant_; }
    bool hermite() const { return !derivs_.empty(); }
    const std::vector<Mat>& samples() const { return samples_; }

private:
    TimeGrid grid_;
    std::vector<Mat> samples_;
    std::vector<Mat> derivs_;
    int rows_ = 0, cols_ = 0;
    bool constant_ = false;
};

Mat sample(const MatrixPath& path, double t);

struct GameSpec {
    int n = 1, m1 = 1, m2 = 1;
    MatrixPath A, C, B1, D1, B2, D2, sigma, f1;
    MatrixPath Q, R1, R2, R0, R0hat;
    Mat G;
    double alpha = 1.0, gamma = 1.0;
    Vec xi;
    TimeGrid grid;
};

// point values of all coefficients
struct Coeffs {
    Mat A, C, B1, D1, B2, D2, sigma, f1, Q, R1, R2, R0, R0hat;
};
Coeffs coeffs_at(const GameSpec& s, double t);

struct Check {
    std::string name;
    bool pass;
    std::string detail;
    std::optional<int> node;
};

struct ValidationReport {
    std::vector<Check> checks;
    bool ok() const;
    std::string summary() const;
};

ValidationReport validate_spec(const GameSpec& spec, double delta = 1e-8);

// JSON game description
GameSpec parse_spec(const std::string& text, std::optional<int> grid_n = std::nullopt);
GameSpec load_spec(const std::string& file, std::optional<int> grid_n = std::nullopt);
std::string dump_spec(const GameSpec& spec);

// same spec sampled on a new grid
GameSpec regrid(const GameSpec& spec, int N);

double min_eig_sym(const Mat& m);
double max_eig_sym(const Mat& m);

}  // namespace rsg
