#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace regsel {

/// Columns whose remaining norm after projecting out the earlier accepted
/// columns falls below tolerance * (original column norm) are aliased.
inline constexpr double kDefaultAliasTolerance = 1e-10;

/// Householder QR with limited column pivoting: columns are processed in
/// their original order and a column that is numerically dependent on the
/// accepted ones is moved behind them (flagged aliased) instead of being
/// factored. Accepted columns therefore keep their relative order, and the
/// later member of a collinear set is the one that gets aliased.
class PivotedQr {
public:
    explicit PivotedQr(const Eigen::MatrixXd& x, double tolerance = kDefaultAliasTolerance);

    Eigen::Index rows() const { return qr_.rows(); }
    Eigen::Index cols() const { return qr_.cols(); }
    Eigen::Index rank() const { return static_cast<Eigen::Index>(accepted_.size()); }

    /// Original indices of the accepted (non-aliased) columns, in order.
    const std::vector<std::size_t>& accepted() const { return accepted_; }
    const std::vector<bool>& aliased() const { return aliased_; }

    /// Upper-triangular rank x rank factor for the accepted columns.
    Eigen::MatrixXd r_factor() const;

    /// Q' y (length n).
    Eigen::VectorXd apply_qt(const Eigen::VectorXd& y) const;
    /// Q z (length n).
    Eigen::VectorXd apply_q(Eigen::VectorXd z) const;

    /// First `rank` columns of Q.
    Eigen::MatrixXd thin_q() const;

    /// Least-squares coefficients, length cols(); aliased entries are zero.
    Eigen::VectorXd solve(const Eigen::VectorXd& y) const;

    /// Diagonal of the hat matrix: squared row norms of thin_q().
    Eigen::VectorXd leverage() const;

private:
    Eigen::MatrixXd qr_;
    std::vector<double> tau_;
    std::vector<std::size_t> accepted_;
    std::vector<bool> aliased_;
};

/// Residual sum of squares and rank of the least-squares fit of y on x.
struct LeastSquaresSummary {
    double rss = 0.0;
    Eigen::Index rank = 0;
};

LeastSquaresSummary least_squares_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      double tolerance = kDefaultAliasTolerance);

/// Residuals of the least-squares fit of y on x.
Eigen::VectorXd least_squares_residuals(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        double tolerance = kDefaultAliasTolerance);

}  // namespace regsel
