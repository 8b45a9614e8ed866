#pragma once

#include "regsel/design.hpp"
#include "regsel/linmodel.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regsel {

enum class Direction { forward, backward, both };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

/// Search bounds over term names. The intercept is always present and is
/// not a term. An empty `upper` means "every term of the design".
struct Scope {
    std::vector<std::string> lower;
    std::vector<std::string> upper;
    double penalty = kDefaultAicPenalty;
};

enum class MoveKind { add, remove };

struct Move {
    MoveKind kind = MoveKind::add;
    std::string term;
    double aic_before = 0.0;
    double aic_after = 0.0;
};

struct SkippedCandidate {
    std::size_t step = 0;
    MoveKind kind = MoveKind::add;
    std::string term;
    std::string reason;
};

struct SelectionTrace {
    Direction mode = Direction::both;
    std::vector<std::string> start_terms;
    std::vector<Move> moves;
    std::vector<std::string> final_terms;  // in design term order
    double final_aic = 0.0;
    FittedModel final_model;
    std::vector<SkippedCandidate> skipped;
};

inline constexpr double kDefaultAicTolerance = 1e-9;

struct SelectionOptions {
    double aic_tolerance = kDefaultAicTolerance;
    std::size_t workers = 1;
    FitOptions fit;
};

/// Start set used when none is given: lower for forward, upper otherwise.
std::vector<std::string> default_start(const DesignMatrix& data, const Scope& scope, Direction mode);

/// Greedy AIC search. Each step fits every legal single-term move, applies
/// the one with the smallest selection AIC if it beats the current AIC by
/// more than the tolerance (ties: earliest term in design order), and stops
/// otherwise. Candidates whose AIC is undefined are skipped and logged.
SelectionTrace step_select(const DesignMatrix& data, const Scope& scope, Direction mode,
                           std::optional<std::vector<std::string>> start = std::nullopt,
                           const SelectionOptions& options = {});

/// Applies the recorded moves to the start set; returns terms in design order.
std::vector<std::string> replay_moves(const DesignMatrix& data, const std::vector<std::string>& start,
                                      const std::vector<Move>& moves);

/// "step<TAB>add|remove<TAB>term<TAB>aic_before<TAB>aic_after" lines under a header.
std::string trace_to_text(const SelectionTrace& trace);

struct ComparisonColumn {
    std::string label;
    double press_ss = 0.0;
    double aic_full = 0.0;
    double adj_r_squared = 0.0;
    double dffits_ss = 0.0;
    Eigen::Index rank = 0;
};

struct ComparisonTable {
    std::vector<ComparisonColumn> columns;
    std::string to_text() const;
};

/// Sum of squared PRESS, full AIC, adjusted R^2, sum of squared DFFITS and
/// rank per model. All models must share one row set.
ComparisonTable compare_models(const std::vector<FittedModel>& models, const std::vector<std::string>& labels = {});

struct SelectionPlan {
    Scope scope;
    std::vector<Direction> modes{Direction::forward, Direction::backward, Direction::both};
    /// Start the both-direction search from the lower model instead of upper.
    bool both_from_lower = false;
    SelectionOptions options;
};

std::vector<SelectionTrace> run_selection(const DesignMatrix& data, const SelectionPlan& plan);

struct ExclusionRerun {
    std::vector<std::size_t> excluded;  // 0-based
    std::vector<SelectionTrace> before;
    std::vector<SelectionTrace> after;
    ComparisonTable before_table;
    ComparisonTable after_table;
    std::string to_text() const;
};

/// Reruns every mode of the plan on the data minus the given rows and
/// tabulates the comparison before and after.
ExclusionRerun refit_excluding_rows(const SelectionPlan& plan, const DesignMatrix& data,
                                    const std::vector<std::size_t>& excluded_rows);

std::string mode_label(Direction d);

}  // namespace regsel
