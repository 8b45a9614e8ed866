#include "regsel/selection.hpp"

#include "regsel/diagnostics.hpp"
#include "regsel/error.hpp"
#include "regsel/least_squares.hpp"
#include "regsel/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace regsel {

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::forward: return "forward";
        case Direction::backward: return "backward";
        case Direction::both: return "both";
    }
    return "unknown";
}

Direction parse_direction(std::string_view text) {
    if (text == "forward") return Direction::forward;
    if (text == "backward") return Direction::backward;
    if (text == "both" || text == "stepwise") return Direction::both;
    throw ArgumentError("unknown selection mode '" + std::string(text) + "'");
}

std::string mode_label(Direction d) {
    switch (d) {
        case Direction::forward: return "Forward";
        case Direction::backward: return "Backward";
        case Direction::both: return "Stepwise";
    }
    return "?";
}

namespace {

using TermMask = std::vector<bool>;

TermMask mask_of(const DesignMatrix& data, const std::vector<std::string>& names, const char* what) {
    TermMask m(data.terms().size(), false);
    for (const auto& n : names) {
        auto t = data.term_index(n);
        if (!t) throw ArgumentError(std::string(what) + " names unknown term '" + n + "'");
        m[*t] = true;
    }
    return m;
}

std::vector<std::string> names_of(const DesignMatrix& data, const TermMask& m) {
    std::vector<std::string> out;
    for (std::size_t t = 0; t < m.size(); ++t) {
        if (m[t]) out.push_back(data.terms()[t].name);
    }
    return out;
}

bool subset_of(const TermMask& a, const TermMask& b) {
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (a[t] && !b[t]) return false;
    }
    return true;
}

TermMask upper_mask(const DesignMatrix& data, const Scope& scope) {
    if (scope.upper.empty()) return TermMask(data.terms().size(), true);
    return mask_of(data, scope.upper, "scope upper");
}

class AicEvaluator {
public:
    AicEvaluator(const DesignMatrix& data, double penalty, double tolerance)
        : data_(data), penalty_(penalty), tolerance_(tolerance), floor_(rss_floor(data.y())) {}

    double operator()(const TermMask& mask) const {
        std::vector<std::size_t> cols{0};
        for (std::size_t t = 0; t < mask.size(); ++t) {
            if (!mask[t]) continue;
            const auto& g = data_.terms()[t].columns;
            cols.insert(cols.end(), g.begin(), g.end());
        }
        Eigen::MatrixXd x(data_.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) {
            x.col(static_cast<Eigen::Index>(j)) = data_.x().col(static_cast<Eigen::Index>(cols[j]));
        }
        const auto fit = least_squares_rss(x, data_.y(), tolerance_);
        if (fit.rss <= floor_) throw NumericalError("exact fit: AIC undefined");
        return aic_selection(data_.rows(), fit.rss, fit.rank, penalty_);
    }

private:
    const DesignMatrix& data_;
    double penalty_;
    double tolerance_;
    double floor_;
};

struct Candidate {
    MoveKind kind;
    std::size_t term;
};

}  // namespace

std::vector<std::string> default_start(const DesignMatrix& data, const Scope& scope, Direction mode) {
    if (mode == Direction::forward) return scope.lower;
    return names_of(data, upper_mask(data, scope));
}

SelectionTrace step_select(const DesignMatrix& data, const Scope& scope, Direction mode,
                           std::optional<std::vector<std::string>> start, const SelectionOptions& options) {
    if (!(scope.penalty > 0.0)) throw ArgumentError("AIC penalty k must be positive");
    const TermMask lower = mask_of(data, scope.lower, "scope lower");
    const TermMask upper = upper_mask(data, scope);
    if (!subset_of(lower, upper)) throw ArgumentError("scope lower model is not contained in the upper model");

    const auto start_names = start ? *start : default_start(data, scope, mode);
    TermMask current = mask_of(data, start_names, "start model");
    if (!subset_of(lower, current) || !subset_of(current, upper)) {
        throw ArgumentError("start model lies outside the search scope");
    }

    const AicEvaluator evaluate(data, scope.penalty, options.fit.alias_tolerance);
    SelectionTrace trace;
    trace.mode = mode;
    trace.start_terms = names_of(data, current);
    double current_aic = evaluate(current);

    const bool can_add = mode != Direction::backward;
    const bool can_remove = mode != Direction::forward;
    for (std::size_t step = 1;; ++step) {
        std::vector<Candidate> candidates;
        for (std::size_t t = 0; t < current.size(); ++t) {
            if (current[t] && can_remove && !lower[t]) candidates.push_back({MoveKind::remove, t});
            if (!current[t] && can_add && upper[t]) candidates.push_back({MoveKind::add, t});
        }
        if (candidates.empty()) break;

        std::vector<double> aic(candidates.size(), std::numeric_limits<double>::quiet_NaN());
        std::vector<std::string> failure(candidates.size());
        parallel_for(candidates.size(), options.workers, [&](std::size_t c) {
            TermMask m = current;
            m[candidates[c].term] = candidates[c].kind == MoveKind::add;
            try {
                aic[c] = evaluate(m);
            } catch (const Error& e) {
                failure[c] = e.what();
            }
        });

        std::optional<std::size_t> best;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (!failure[c].empty()) {
                trace.skipped.push_back({step, candidates[c].kind, data.terms()[candidates[c].term].name, failure[c]});
                continue;
            }
            if (!best || aic[c] < aic[*best]) best = c;
        }
        if (!best || !(aic[*best] < current_aic - options.aic_tolerance)) break;

        const auto& chosen = candidates[*best];
        trace.moves.push_back({chosen.kind, data.terms()[chosen.term].name, current_aic, aic[*best]});
        current[chosen.term] = chosen.kind == MoveKind::add;
        current_aic = aic[*best];
    }

    trace.final_terms = names_of(data, current);
    trace.final_aic = current_aic;
    trace.final_model = fit_ols(data.select_terms_by_name(trace.final_terms), options.fit);
    return trace;
}

std::vector<std::string> replay_moves(const DesignMatrix& data, const std::vector<std::string>& start,
                                      const std::vector<Move>& moves) {
    TermMask m = mask_of(data, start, "start model");
    for (const auto& mv : moves) {
        auto t = data.term_index(mv.term);
        if (!t) throw ArgumentError("move names unknown term '" + mv.term + "'");
        const bool add = mv.kind == MoveKind::add;
        if (m[*t] == add) throw ArgumentError("move on term '" + mv.term + "' does not apply to the replayed model");
        m[*t] = add;
    }
    return names_of(data, m);
}

namespace {

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10f", v);
    return buf;
}

}  // namespace

std::string trace_to_text(const SelectionTrace& trace) {
    std::ostringstream os;
    os << "step\tmove\tterm\taic_before\taic_after\n";
    for (std::size_t i = 0; i < trace.moves.size(); ++i) {
        const auto& m = trace.moves[i];
        os << (i + 1) << "\t" << (m.kind == MoveKind::add ? "add" : "remove") << "\t" << m.term << "\t"
           << full_precision(m.aic_before) << "\t" << full_precision(m.aic_after) << "\n";
    }
    return os.str();
}

ComparisonTable compare_models(const std::vector<FittedModel>& models, const std::vector<std::string>& labels) {
    if (models.empty()) throw ArgumentError("no models to compare");
    if (!labels.empty() && labels.size() != models.size()) throw ArgumentError("one label per model required");
    ComparisonTable table;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        if (m.n() != models.front().n() || m.design().row_ids() != models.front().design().row_ids()) {
            throw ArgumentError("models were fitted on different row sets and cannot be compared");
        }
        ComparisonColumn c;
        c.label = labels.empty() ? "model" + std::to_string(i + 1) : labels[i];
        c.press_ss = press_residuals(m).squaredNorm();
        c.aic_full = fit_statistics(m).aic_full;
        c.adj_r_squared = fit_statistics(m).adj_r_squared;
        c.dffits_ss = dffits(m).squaredNorm();
        c.rank = m.rank();
        table.columns.push_back(c);
    }
    return table;
}

std::string ComparisonTable::to_text() const {
    std::ostringstream os;
    os << "metric";
    for (const auto& c : columns) os << "\t" << c.label;
    os << "\nsum-of-squared PRESS";
    for (const auto& c : columns) os << "\t" << full_precision(c.press_ss);
    os << "\nAIC";
    for (const auto& c : columns) os << "\t" << full_precision(c.aic_full);
    os << "\nAdjusted R^2";
    for (const auto& c : columns) os << "\t" << full_precision(c.adj_r_squared);
    os << "\nsum-of-squared DFFITS";
    for (const auto& c : columns) os << "\t" << full_precision(c.dffits_ss);
    os << "\nNumber of Predictors";
    for (const auto& c : columns) os << "\t" << c.rank;
    os << "\n";
    return os.str();
}

std::vector<SelectionTrace> run_selection(const DesignMatrix& data, const SelectionPlan& plan) {
    std::vector<SelectionTrace> traces;
    for (auto mode : plan.modes) {
        std::optional<std::vector<std::string>> start;
        if (mode == Direction::both && plan.both_from_lower) start = plan.scope.lower;
        traces.push_back(step_select(data, plan.scope, mode, start, plan.options));
    }
    return traces;
}

namespace {

ComparisonTable table_for(const std::vector<SelectionTrace>& traces) {
    std::vector<FittedModel> models;
    std::vector<std::string> labels;
    for (const auto& t : traces) {
        models.push_back(t.final_model);
        labels.push_back(mode_label(t.mode));
    }
    return compare_models(models, labels);
}

}  // namespace

ExclusionRerun refit_excluding_rows(const SelectionPlan& plan, const DesignMatrix& data,
                                    const std::vector<std::size_t>& excluded_rows) {
    const DesignMatrix reduced = data.without_rows(excluded_rows);
    const auto upper = upper_mask(data, plan.scope);
    Eigen::Index upper_cols = 1;
    for (std::size_t t = 0; t < upper.size(); ++t) {
        if (upper[t]) upper_cols += static_cast<Eigen::Index>(data.terms()[t].columns.size());
    }
    if (reduced.rows() <= upper_cols) {
        throw ArgumentError("after excluding rows only " + std::to_string(reduced.rows()) +
                            " remain, not more than the upper model's " + std::to_string(upper_cols) + " columns");
    }
    ExclusionRerun out;
    out.excluded = excluded_rows;
    out.before = run_selection(data, plan);
    out.after = run_selection(reduced, plan);
    out.before_table = table_for(out.before);
    out.after_table = table_for(out.after);
    return out;
}

std::string ExclusionRerun::to_text() const {
    std::ostringstream os;
    os << "# excluded_rows=";
    for (std::size_t i = 0; i < excluded.size(); ++i) os << (i ? "," : "") << excluded[i] + 1;
    os << "\n";
    os << "metric";
    for (const auto& c : before_table.columns) os << "\t" << c.label << "_all";
    for (const auto& c : after_table.columns) os << "\t" << c.label << "_excluded";
    os << "\n";
    auto row = [&](const char* name, auto get) {
        os << name;
        for (const auto& c : before_table.columns) os << "\t" << get(c);
        for (const auto& c : after_table.columns) os << "\t" << get(c);
        os << "\n";
    };
    row("sum-of-squared PRESS", [](const ComparisonColumn& c) { return full_precision(c.press_ss); });
    row("AIC", [](const ComparisonColumn& c) { return full_precision(c.aic_full); });
    row("Adjusted R^2", [](const ComparisonColumn& c) { return full_precision(c.adj_r_squared); });
    row("sum-of-squared DFFITS", [](const ComparisonColumn& c) { return full_precision(c.dffits_ss); });
    row("Number of Predictors", [](const ComparisonColumn& c) { return std::to_string(c.rank); });
    return os.str();
}

}  // namespace regsel
