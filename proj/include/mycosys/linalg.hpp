#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "mycosys/error.hpp"

namespace mycosys::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double rank_threshold = 1e-10;

struct LeastSquares {
    Vector coefficients;
    Vector residuals;
    double rss = 0.0;
    Eigen::Index rank = 0;
};

/// Rank-revealing least squares via column-pivoted Householder QR.
/// Rank-deficient designs still yield the correct projection residual.
[[nodiscard]] inline LeastSquares least_squares(const Matrix& a, const Vector& b) {
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    qr.setThreshold(rank_threshold);
    LeastSquares out;
    out.coefficients = qr.solve(b);
    out.residuals = b - a * out.coefficients;
    out.rss = out.residuals.squaredNorm();
    out.rank = qr.rank();
    return out;
}

/// Full-rank least squares; throws singular_regression when the design is rank deficient.
[[nodiscard]] inline LeastSquares least_squares_full_rank(const Matrix& a, const Vector& b, const char* what) {
    auto ls = least_squares(a, b);
    if (ls.rank < a.cols()) {
        throw Error(Errc::singular_regression, std::string(what) + ": design matrix is rank deficient (rank " +
                                                   std::to_string(ls.rank) + " of " + std::to_string(a.cols()) + ")");
    }
    return ls;
}

}  // namespace mycosys::linalg
