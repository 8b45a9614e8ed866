#include "regsel/diagnostics.hpp"

#include "regsel/error.hpp"
#include "regsel/least_squares.hpp"
#include "regsel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace regsel {

namespace {

constexpr double kUnitLeverageSlack = 1e-10;

void require_leverage_below_one(const FittedModel& model) {
    const auto& h = model.leverage();
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        if (1.0 - h(i) <= kUnitLeverageSlack) {
            throw NumericalError("row " + model.design().row_ids()[static_cast<std::size_t>(i)] +
                                 " has leverage 1 (exact-fit point)");
        }
    }
}

double residual_variance(const FittedModel& model) {
    const auto df = model.n() - model.rank();
    if (df < 1) throw NumericalError("residual variance undefined: n <= rank");
    const double s2 = model.rss() / static_cast<double>(df);
    if (!(s2 > 0.0)) throw NumericalError("residual variance is zero (exact fit)");
    return s2;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

Eigen::VectorXd press_residuals(const FittedModel& model) {
    require_leverage_below_one(model);
    return model.residuals().array() / (1.0 - model.leverage().array());
}

Eigen::VectorXd cooks_distance(const FittedModel& model) {
    const double s2 = residual_variance(model);
    require_leverage_below_one(model);
    const auto& e = model.residuals().array();
    const auto& h = model.leverage().array();
    return e.square() * h / (static_cast<double>(model.rank()) * s2 * (1.0 - h).square());
}

Eigen::VectorXd studentized(const FittedModel& model, StudentizedKind kind) {
    require_leverage_below_one(model);
    const auto& e = model.residuals().array();
    const auto& h = model.leverage().array();
    if (kind == StudentizedKind::internal) {
        const double s2 = residual_variance(model);
        return e / (std::sqrt(s2) * (1.0 - h).sqrt());
    }
    const auto df = model.n() - model.rank() - 1;
    if (df < 1) throw NumericalError("externally studentized residuals need n - rank - 1 >= 1");
    const Eigen::ArrayXd deleted_var =
        ((model.rss() - e.square() / (1.0 - h)) / static_cast<double>(df)).max(0.0);
    Eigen::VectorXd t(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        t(i) = e(i) == 0.0 ? 0.0 : e(i) / std::sqrt(deleted_var(i) * (1.0 - h(i)));
    }
    return t;
}

Eigen::VectorXd dffits(const FittedModel& model) {
    const Eigen::VectorXd t = studentized(model, StudentizedKind::external);
    const auto& h = model.leverage().array();
    return t.array() * (h / (1.0 - h)).sqrt();
}

constexpr double kTieTolerance = 1e-10;

InfluenceReport influence_flags(const FittedModel& model, std::size_t top_m) {
    const auto n = static_cast<std::size_t>(model.n());
    if (top_m < 1 || top_m > n) throw ArgumentError("top_m must lie in [1, n]");
    InfluenceReport r;
    r.leverage = model.leverage();
    r.mean_leverage = r.leverage.mean();
    r.high_leverage.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.high_leverage[i] = r.leverage(static_cast<Eigen::Index>(i)) > 2.0 * r.mean_leverage;

    r.cooks_d = cooks_distance(model);
    const double prob = static_cast<double>(n - top_m) / static_cast<double>(n);
    r.cook_threshold = quantile(std::span<const double>(r.cooks_d.data(), n), prob);
    r.top_influence.resize(n);
    // values within rounding of the threshold count as ties
    const double cut = r.cook_threshold - kTieTolerance * std::fabs(r.cook_threshold);
    for (std::size_t i = 0; i < n; ++i) r.top_influence[i] = r.cooks_d(static_cast<Eigen::Index>(i)) >= cut;

    r.press = press_residuals(model);
    r.studentized_internal = studentized(model, StudentizedKind::internal);
    if (model.n() - model.rank() - 1 >= 1) {
        r.studentized_external = studentized(model, StudentizedKind::external);
        r.dffits = r.studentized_external.array() * (r.leverage.array() / (1.0 - r.leverage.array())).sqrt();
    } else {
        // no leave-one-out degrees of freedom
        r.studentized_external = Eigen::VectorXd::Constant(model.n(), std::numeric_limits<double>::quiet_NaN());
        r.dffits = r.studentized_external;
    }
    return r;
}

std::string influence_plot_data(const InfluenceReport& report, const std::vector<std::string>& row_ids) {
    std::ostringstream os;
    os << "# two_mean_leverage=" << fmt(2.0 * report.mean_leverage) << "\n";
    os << "# cook_threshold=" << fmt(report.cook_threshold) << "\n";
    os << "row_id\tleverage\tcooks_d\thigh_leverage_flag\ttop_influence_flag\n";
    for (Eigen::Index i = 0; i < report.leverage.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        os << row_ids[k] << "\t" << fmt(report.leverage(i)) << "\t" << fmt(report.cooks_d(i)) << "\t"
           << (report.high_leverage[k] ? 1 : 0) << "\t" << (report.top_influence[k] ? 1 : 0) << "\n";
    }
    return os.str();
}

namespace {

std::vector<std::size_t> vif_columns(const DesignMatrix& design, bool numeric_only) {
    std::vector<std::size_t> cols;
    for (const auto& g : design.terms()) {
        if (numeric_only && g.kind != TermKind::numeric) continue;
        cols.insert(cols.end(), g.columns.begin(), g.columns.end());
    }
    std::sort(cols.begin(), cols.end());
    return cols;
}

// One auxiliary regression per column; used when the predictor block is
// rank deficient, where the inverse-Gram shortcut does not apply.
std::vector<double> vif_by_auxiliary_regressions(const Eigen::MatrixXd& block, std::vector<bool>& infinite) {
    const Eigen::Index n = block.rows();
    const Eigen::Index k = block.cols();
    std::vector<double> out(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::MatrixXd others(n, k);
        others.col(0).setOnes();
        Eigen::Index c = 1;
        for (Eigen::Index m = 0; m < k; ++m) {
            if (m != j) others.col(c++) = block.col(m);
        }
        const Eigen::VectorXd xj = block.col(j);
        const auto fit = least_squares_rss(others, xj);
        const double tss = (xj.array() - xj.mean()).square().sum();
        const auto jj = static_cast<std::size_t>(j);
        if (tss == 0.0 || std::sqrt(fit.rss) <= kDefaultAliasTolerance * xj.norm()) {
            infinite[jj] = true;
            out[jj] = std::numeric_limits<double>::infinity();
        } else {
            out[jj] = tss / fit.rss;
        }
    }
    return out;
}

}  // namespace

VifReport vif(const DesignMatrix& design, bool numeric_only) {
    const auto cols = vif_columns(design, numeric_only);
    if (cols.empty()) throw ArgumentError("VIF needs at least one predictor column");

    const Eigen::Index n = design.rows();
    const auto k = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd block(n, k);
    for (Eigen::Index j = 0; j < k; ++j) block.col(j) = design.x().col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]));

    // Centering absorbs the intercept; VIF_j = TSS_j * [(Xc'Xc)^-1]_jj.
    const Eigen::RowVectorXd means = block.colwise().mean();
    const Eigen::MatrixXd centered = block.rowwise() - means;
    PivotedQr qr(centered);

    // The centered block can only be judged full rank when no column lost
    // (almost) all of its norm to centering or to the earlier columns.
    bool full_rank = qr.rank() == k;
    for (Eigen::Index j = 0; full_rank && j < k; ++j) {
        if (centered.col(j).norm() <= kDefaultAliasTolerance * block.col(j).norm()) full_rank = false;
    }

    std::vector<bool> infinite(static_cast<std::size_t>(k), false);
    std::vector<double> values;
    if (full_rank) {
        const Eigen::MatrixXd r_inv = qr.r_factor().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
        const Eigen::VectorXd tss = centered.colwise().squaredNorm().transpose();
        values.resize(static_cast<std::size_t>(k));
        for (Eigen::Index j = 0; j < k; ++j) values[static_cast<std::size_t>(j)] = tss(j) * r_inv.row(j).squaredNorm();
    } else {
        values = vif_by_auxiliary_regressions(block, infinite);
    }

    VifReport report;
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        report.values.push_back({design.columns()[cols[jj]].name, cols[jj], values[jj], infinite[jj]});
    }
    return report;
}

VifPruneResult vif_prune(const DesignMatrix& design, double vstar) {
    if (!(vstar > 1.0)) throw ArgumentError("VIF threshold must exceed 1");
    std::vector<std::size_t> numeric;
    for (std::size_t t = 0; t < design.terms().size(); ++t) {
        if (design.terms()[t].kind == TermKind::numeric) numeric.push_back(t);
    }
    if (numeric.empty()) throw ArgumentError("VIF pruning needs at least one numeric predictor");

    VifPruneResult result{design, {}, {}};
    std::vector<VifRemoval> trail;
    std::vector<std::size_t> removed;
    bool first = true;
    while (true) {
        const DesignMatrix sub = design.select_terms(numeric);
        VifReport current = vif(sub, true);
        current.threshold = vstar;
        if (first) {
            result.initial = current;
            first = false;
        }
        std::size_t worst = 0;
        for (std::size_t j = 1; j < current.values.size(); ++j) {
            if (current.values[j].value > current.values[worst].value) worst = j;
        }
        if (current.values[worst].value <= vstar) {
            current.trail = trail;
            result.report = std::move(current);
            break;
        }
        if (numeric.size() == 1) throw NumericalError("VIF pruning would remove every numeric predictor");
        // sub has one column per numeric term, in term order
        trail.push_back({current.values[worst].name, current.values[worst].value});
        removed.push_back(numeric[worst]);
        numeric.erase(numeric.begin() + static_cast<std::ptrdiff_t>(worst));
    }

    std::vector<std::size_t> keep;
    for (std::size_t t = 0; t < design.terms().size(); ++t) {
        if (std::find(removed.begin(), removed.end(), t) == removed.end()) keep.push_back(t);
    }
    result.design = design.select_terms(keep);
    return result;
}

AddedVariableData added_variable_data(const FittedModel& model, const std::string& term) {
    const auto& design = model.design();
    auto t = design.term_index(term);
    if (!t) throw ArgumentError("model has no term named '" + term + "'");
    const auto& g = design.terms()[*t];
    if (g.columns.size() != 1) {
        throw ArgumentError("added-variable data needs a single-column term; '" + term + "' has " +
                            std::to_string(g.columns.size()) + " columns");
    }
    const auto j = static_cast<Eigen::Index>(g.columns.front());
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    Eigen::MatrixXd others(n, p - 1);
    for (Eigen::Index c = 0, k = 0; c < p; ++c) {
        if (c != j) others.col(k++) = design.x().col(c);
    }
    AddedVariableData out;
    out.x_partial = least_squares_residuals(others, design.x().col(j));
    out.y_partial = least_squares_residuals(others, design.y());
    const double sxx = out.x_partial.squaredNorm();
    if (sxx <= std::pow(kDefaultAliasTolerance * design.x().col(j).norm(), 2)) {
        throw NumericalError("term '" + term + "' is aliased; its added-variable slope is undefined");
    }
    out.slope = out.x_partial.dot(out.y_partial) / sxx;
    return out;
}

}  // namespace regsel
