#pragma once

// allocation-free small dense helpers for the path loops, column-major like Eigen

#include <Eigen/Dense>

namespace rsg::kern {

// y += s * M x
inline void gemv(const Eigen::MatrixXd& M, const double* x, double* y, double s = 1.0) {
    const int r = static_cast<int>(M.rows()), c = static_cast<int>(M.cols());
    const double* m = M.data();
    for (int j = 0; j < c; ++j) {
        const double xj = s * x[j];
        const double* col = m + static_cast<long>(j) * r;
        for (int i = 0; i < r; ++i) y[i] += col[i] * xj;
    }
}

// y = M x + b
inline void affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& b, const double* x, double* y) {
    for (int i = 0; i < b.size(); ++i) y[i] = b[i];
    gemv(M, x, y);
}

inline double quad(const Eigen::MatrixXd& M, const double* x) {
    const int n = static_cast<int>(M.rows());
    const double* m = M.data();
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        double cj = 0.0;
        for (int i = 0; i < n; ++i) cj += m[static_cast<long>(j) * n + i] * x[i];
        s += cj * x[j];
    }
    return s;
}

inline bool finite(const double* x, int n) {
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

}  // namespace rsg::kern
