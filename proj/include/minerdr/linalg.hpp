#pragma once

#include <Eigen/Dense>

namespace minerdr::linalg {

/// Least-squares solution of X b = y via column-pivoted QR.
struct LeastSquares {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd cov_unscaled;  // (X'X)^-1
    double ssr = 0.0;
    Eigen::Index rank = 0;
};

/// Throws DegenerateError when X is rank deficient.
[[nodiscard]] LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Ratio of largest to smallest singular value (infinite for a zero column).
[[nodiscard]] double condition_number(const Eigen::MatrixXd& X);

}  // namespace minerdr::linalg
