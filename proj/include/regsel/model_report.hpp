#pragma once

#include "regsel/linmodel.hpp"

#include <string>
#include <vector>

namespace regsel {

struct CoefficientRow {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t_value = 0.0;
    double p_value = 0.0;
    bool aliased = false;
};

/// Estimates with standard errors, t statistics and two-sided p-values
/// from Student's t with n - rank degrees of freedom.
std::vector<CoefficientRow> coefficient_table(const FittedModel& model);

/// "response ~ term1 + term2 + ..." ("response ~ 1" for the null model).
std::string model_formula(const DesignMatrix& design);

/// Human-readable summary: call, residual quantiles, coefficient table,
/// residual standard error, R^2 and F statistic.
std::string model_report_text(const FittedModel& model);

/// Tab-delimited coefficient table with a one-line header.
std::string model_report_delimited(const FittedModel& model);

}  // namespace regsel
