#pragma once

#include "regsel/design.hpp"
#include "regsel/least_squares.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace regsel {

enum class ResponseTransform { identity, log };

struct FitOptions {
    double alias_tolerance = kDefaultAliasTolerance;
    /// Reject designs containing an all-zero column instead of aliasing it.
    bool strict = false;
};

/// Ordinary least-squares fit of a DesignMatrix. Immutable after construction.
class FittedModel {
public:
    const DesignMatrix& design() const { return design_; }
    /// Length p; aliased entries are NaN.
    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    const std::vector<bool>& aliased() const { return aliased_; }
    const Eigen::VectorXd& fitted() const { return fitted_; }
    const Eigen::VectorXd& residuals() const { return residuals_; }
    const Eigen::VectorXd& leverage() const { return leverage_; }
    double rss() const { return rss_; }
    Eigen::Index rank() const { return rank_; }
    Eigen::Index n() const { return design_.rows(); }
    ResponseTransform transform() const { return transform_; }

    /// Unscaled standard errors sqrt(diag((X'X)^-1)); NaN for aliased columns.
    Eigen::VectorXd unscaled_standard_errors() const;

private:
    friend FittedModel fit_ols(const DesignMatrix&, const FitOptions&);
    friend FittedModel refit_log_response(const FittedModel&);

    DesignMatrix design_;
    Eigen::VectorXd coefficients_;
    std::vector<bool> aliased_;
    Eigen::VectorXd fitted_;
    Eigen::VectorXd residuals_;
    Eigen::VectorXd leverage_;
    Eigen::MatrixXd r_factor_;
    std::vector<std::size_t> accepted_;
    double rss_ = 0.0;
    Eigen::Index rank_ = 0;
    ResponseTransform transform_ = ResponseTransform::identity;
    FitOptions options_;
};

FittedModel fit_ols(const DesignMatrix& design, const FitOptions& options = {});

/// X_new * beta with aliased coefficients contributing zero. Columns of the
/// new design are matched to the model's columns by name.
Eigen::VectorXd predict(const FittedModel& model, const DesignMatrix& new_design);

struct FitStatistics {
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    double aic_full = 0.0;
    double aic_selection = 0.0;
    double sigma_hat = 0.0;
};

inline constexpr double kDefaultAicPenalty = 2.0;

/// Adjusted R^2 = 1 - (1 - R^2)(n - 1)/(n - rank).
double adjusted_r_squared(double r_squared, Eigen::Index n, Eigen::Index rank);

/// Gaussian log-likelihood AIC counting the variance as a parameter:
/// n ln(2 pi) + n ln(RSS/n) + n + 2(rank + 1).
double aic_full(Eigen::Index n, double rss, Eigen::Index rank);

/// Constant-free AIC used by the greedy search: n ln(RSS/n) + k rank.
double aic_selection(Eigen::Index n, double rss, Eigen::Index rank, double penalty = kDefaultAicPenalty);

/// Lower bound on RSS below which AIC is treated as undefined.
double rss_floor(const Eigen::VectorXd& y);

FitStatistics fit_statistics(const FittedModel& model, double penalty = kDefaultAicPenalty);

/// Refits the same design against ln(y).
FittedModel refit_log_response(const FittedModel& model);

}  // namespace regsel
