#pragma once

#include "regsel/design.hpp"
#include "regsel/linmodel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace regsel {

/// Leave-one-out prediction errors e_i / (1 - h_i).
Eigen::VectorXd press_residuals(const FittedModel& model);

/// Cook's distance e_i^2 h_i / (rank sigma^2 (1 - h_i)^2), sigma^2 = RSS/(n - rank).
Eigen::VectorXd cooks_distance(const FittedModel& model);

enum class StudentizedKind { internal, external };

/// internal: e_i / (sigma sqrt(1 - h_i));
/// external: e_i / (s_(i) sqrt(1 - h_i)) with the deleted-row variance
/// s_(i)^2 = (RSS - e_i^2/(1 - h_i)) / (n - rank - 1).
Eigen::VectorXd studentized(const FittedModel& model, StudentizedKind kind);

/// t_i sqrt(h_i / (1 - h_i)) with t_i the externally studentized residual.
Eigen::VectorXd dffits(const FittedModel& model);

struct InfluenceReport {
    Eigen::VectorXd leverage;
    double mean_leverage = 0.0;
    std::vector<bool> high_leverage;  // h_i > 2 * mean
    Eigen::VectorXd cooks_d;
    double cook_threshold = 0.0;
    std::vector<bool> top_influence;  // cooks_d >= threshold, up to rounding
    Eigen::VectorXd press;
    Eigen::VectorXd dffits;
    Eigen::VectorXd studentized_internal;
    Eigen::VectorXd studentized_external;
};

/// Leverage and Cook's-distance flags. The Cook threshold is the
/// (n - top_m)/n empirical quantile; values within 1e-10 (relative) of the
/// threshold count as ties and are all flagged.
InfluenceReport influence_flags(const FittedModel& model, std::size_t top_m);

/// Delimited plot data: two "# key=value" metadata lines, a header and one
/// row per observation.
std::string influence_plot_data(const InfluenceReport& report, const std::vector<std::string>& row_ids);

struct VifEntry {
    std::string name;       // design column name
    std::size_t column = 0; // index into the design
    double value = 0.0;     // +inf when exactly collinear
    bool infinite = false;
};

struct VifRemoval {
    std::string name;
    double vif = 0.0;
};

struct VifReport {
    std::vector<VifEntry> values;
    std::vector<VifRemoval> trail;
    double threshold = 0.0;
};

/// VIF_j = 1 / (1 - R_j^2) from regressing column j on the other
/// predictor columns plus the intercept. With numeric_only, factor
/// indicator columns are left out of both the report and the regressions.
VifReport vif(const DesignMatrix& design, bool numeric_only = true);

struct VifPruneResult {
    DesignMatrix design;
    VifReport report;      // VIFs of the survivors plus the elimination trail
    VifReport initial;     // VIFs before any removal
};

inline constexpr double kDefaultVifThreshold = 10.0;

/// Repeatedly drops the numeric term with the largest VIF while it exceeds
/// vstar (ties go to the earliest column). Factor terms pass through.
VifPruneResult vif_prune(const DesignMatrix& design, double vstar = kDefaultVifThreshold);

struct AddedVariableData {
    Eigen::VectorXd x_partial;
    Eigen::VectorXd y_partial;
    double slope = 0.0;
};

/// Partial-regression data for a single-column term.
AddedVariableData added_variable_data(const FittedModel& model, const std::string& term);

}  // namespace regsel
