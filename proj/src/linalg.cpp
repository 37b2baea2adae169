#include "minerdr/linalg.hpp"

#include <limits>

#include "minerdr/error.hpp"

namespace minerdr::linalg {

LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw PreconditionError("least_squares: row count mismatch");
    if (X.rows() < X.cols() || X.cols() == 0) throw DegenerateError("least_squares: fewer rows than columns");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-12);
    LeastSquares out;
    out.rank = qr.rank();
    if (out.rank < X.cols()) throw DegenerateError("least_squares: design matrix is rank deficient");
    out.coef = qr.solve(y);
    out.residuals = y - X * out.coef;
    out.ssr = out.residuals.squaredNorm();

    const auto k = X.cols();
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd inner = Rinv * Rinv.transpose();
    // Undo the column permutation: X P = Q R  =>  (X'X)^-1 = P (R'R)^-1 P'.
    const auto& perm = qr.colsPermutation();
    out.cov_unscaled = perm * inner * perm.transpose();
    return out;
}

double condition_number(const Eigen::MatrixXd& X) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return std::numeric_limits<double>::infinity();
    double smin = s(s.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

}  // namespace minerdr::linalg
