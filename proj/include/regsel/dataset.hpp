#pragma once

#include "regsel/design.hpp"
#include "regsel/table.hpp"

#include <string>
#include <variant>
#include <vector>

namespace regsel {

/// Removes every predictor column whose missing count is >= ratio * rows.
/// Id and response columns are never dropped.
RawTable drop_sparse_columns(const RawTable& table, double ratio);

/// Inner join on the shared id column; output sorted ascending by id.
RawTable merge_by_id(const RawTable& a, const RawTable& b);

/// Removes rows with at least one missing cell (exclude columns ignored).
RawTable drop_incomplete_rows(const RawTable& table);

struct AutoDetectBinary {};
using FactorSelection = std::variant<std::vector<std::string>, AutoDetectBinary>;

inline constexpr std::size_t kDefaultMaxLevels = 12;

/// Turns numeric predictor columns into factors with levels equal to the
/// sorted distinct values. Auto-detect picks columns with values in {0,1}.
RawTable coerce_to_factor(const RawTable& table, const FactorSelection& selection,
                          std::size_t max_levels = kDefaultMaxLevels);

/// Treatment-coded design: intercept, numeric predictors verbatim, and L-1
/// indicators per factor (first sorted level is the reference).
DesignMatrix encode_design(const RawTable& table);

}  // namespace regsel
