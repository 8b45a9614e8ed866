#include "regsel/least_squares.hpp"

#include <Eigen/Householder>

namespace regsel {

PivotedQr::PivotedQr(const Eigen::MatrixXd& x, double tolerance)
    : qr_(x), aliased_(static_cast<std::size_t>(x.cols()), false) {
    const Eigen::Index n = qr_.rows();
    const Eigen::Index p = qr_.cols();
    const Eigen::VectorXd original_norms = x.colwise().norm();
    Eigen::VectorXd workspace(p);
    Eigen::Index k = 0;

    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = static_cast<std::size_t>(j);
        if (k == n) {
            aliased_[col] = true;
            continue;
        }
        const Eigen::Index m = n - k;
        const double remaining = qr_.col(j).tail(m).norm();
        if (original_norms(j) == 0.0 || remaining <= tolerance * original_norms(j)) {
            aliased_[col] = true;
            continue;
        }
        double tau = 0.0;
        double beta = 0.0;
        qr_.col(j).tail(m).makeHouseholderInPlace(tau, beta);
        qr_(k, j) = beta;
        if (j + 1 < p) {
            qr_.block(k, j + 1, m, p - j - 1)
                .applyHouseholderOnTheLeft(qr_.col(j).tail(m - 1), tau, workspace.data());
        }
        tau_.push_back(tau);
        accepted_.push_back(col);
        ++k;
    }
}

Eigen::MatrixXd PivotedQr::r_factor() const {
    const Eigen::Index r = rank();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
    for (Eigen::Index c = 0; c < r; ++c) {
        const auto j = static_cast<Eigen::Index>(accepted_[static_cast<std::size_t>(c)]);
        out.col(c).head(c + 1) = qr_.col(j).head(c + 1);
    }
    return out;
}

Eigen::VectorXd PivotedQr::apply_qt(const Eigen::VectorXd& y) const {
    Eigen::VectorXd z = y;
    const Eigen::Index n = rows();
    double workspace = 0.0;
    for (Eigen::Index k = 0; k < rank(); ++k) {
        const auto j = static_cast<Eigen::Index>(accepted_[static_cast<std::size_t>(k)]);
        z.tail(n - k).applyHouseholderOnTheLeft(qr_.col(j).tail(n - k - 1), tau_[static_cast<std::size_t>(k)], &workspace);
    }
    return z;
}

Eigen::VectorXd PivotedQr::apply_q(Eigen::VectorXd z) const {
    const Eigen::Index n = rows();
    double workspace = 0.0;
    for (Eigen::Index k = rank() - 1; k >= 0; --k) {
        const auto j = static_cast<Eigen::Index>(accepted_[static_cast<std::size_t>(k)]);
        z.tail(n - k).applyHouseholderOnTheLeft(qr_.col(j).tail(n - k - 1), tau_[static_cast<std::size_t>(k)], &workspace);
    }
    return z;
}

Eigen::MatrixXd PivotedQr::thin_q() const {
    const Eigen::Index n = rows();
    const Eigen::Index r = rank();
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, r);
    Eigen::VectorXd workspace(r > 0 ? r : 1);
    for (Eigen::Index k = r - 1; k >= 0; --k) {
        const auto j = static_cast<Eigen::Index>(accepted_[static_cast<std::size_t>(k)]);
        q.bottomRightCorner(n - k, r - k)
            .applyHouseholderOnTheLeft(qr_.col(j).tail(n - k - 1), tau_[static_cast<std::size_t>(k)], workspace.data());
    }
    return q;
}

Eigen::VectorXd PivotedQr::solve(const Eigen::VectorXd& y) const {
    const Eigen::Index r = rank();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(cols());
    if (r == 0) return beta;
    const Eigen::VectorXd z = apply_qt(y);
    const Eigen::VectorXd b = r_factor().triangularView<Eigen::Upper>().solve(z.head(r));
    for (Eigen::Index c = 0; c < r; ++c) beta(static_cast<Eigen::Index>(accepted_[static_cast<std::size_t>(c)])) = b(c);
    return beta;
}

Eigen::VectorXd PivotedQr::leverage() const {
    return thin_q().rowwise().squaredNorm();
}

LeastSquaresSummary least_squares_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tolerance) {
    PivotedQr qr(x, tolerance);
    const Eigen::VectorXd z = qr.apply_qt(y);
    return {z.tail(z.size() - qr.rank()).squaredNorm(), qr.rank()};
}

Eigen::VectorXd least_squares_residuals(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tolerance) {
    PivotedQr qr(x, tolerance);
    Eigen::VectorXd z = qr.apply_qt(y);
    z.head(qr.rank()).setZero();
    return qr.apply_q(std::move(z));
}

}  // namespace regsel
