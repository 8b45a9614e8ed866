#include "regsel/linmodel.hpp"

#include "regsel/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace regsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double total_sum_of_squares(const Eigen::VectorXd& y) {
    return (y.array() - y.mean()).square().sum();
}

}  // namespace

FittedModel fit_ols(const DesignMatrix& design, const FitOptions& options) {
    if (design.rows() < 1) throw ArgumentError("fit requires at least one row");
    const auto& x = design.x();
    if (options.strict) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if ((x.col(j).array() == 0.0).all()) {
                throw NumericalError("design column '" + design.columns()[static_cast<std::size_t>(j)].name +
                                     "' is identically zero");
            }
        }
    }

    PivotedQr qr(x, options.alias_tolerance);
    FittedModel m;
    m.design_ = design;
    m.options_ = options;
    m.rank_ = qr.rank();
    m.aliased_ = qr.aliased();
    m.accepted_ = qr.accepted();
    m.r_factor_ = qr.r_factor();

    const Eigen::VectorXd beta = qr.solve(design.y());
    m.coefficients_ = beta;
    for (std::size_t j = 0; j < m.aliased_.size(); ++j) {
        if (m.aliased_[j]) m.coefficients_(static_cast<Eigen::Index>(j)) = kNaN;
    }

    Eigen::VectorXd z = qr.apply_qt(design.y());
    z.tail(z.size() - m.rank_).setZero();
    m.fitted_ = qr.apply_q(std::move(z));
    m.residuals_ = design.y() - m.fitted_;
    m.rss_ = m.residuals_.squaredNorm();
    m.leverage_ = qr.leverage();
    return m;
}

Eigen::VectorXd FittedModel::unscaled_standard_errors() const {
    Eigen::VectorXd se = Eigen::VectorXd::Constant(design_.cols(), kNaN);
    const Eigen::Index r = rank_;
    if (r == 0) return se;
    const Eigen::MatrixXd r_inv =
        r_factor_.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(r, r));
    for (Eigen::Index c = 0; c < r; ++c) {
        se(static_cast<Eigen::Index>(accepted_[static_cast<std::size_t>(c)])) = r_inv.row(c).norm();
    }
    return se;
}

Eigen::VectorXd predict(const FittedModel& model, const DesignMatrix& new_design) {
    const auto& cols = model.design().columns();
    std::unordered_map<std::string, Eigen::Index> lookup;
    for (std::size_t j = 0; j < new_design.columns().size(); ++j) {
        lookup.emplace(new_design.columns()[j].name, static_cast<Eigen::Index>(j));
    }
    for (const auto& term : model.design().terms()) {
        auto t = new_design.term_index(term.name);
        if (!t || new_design.terms()[*t].columns.size() != term.columns.size()) {
            throw ArgumentError("new design does not carry term '" + term.name + "' with matching columns");
        }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(new_design.rows());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (model.aliased()[j]) continue;
        auto it = lookup.find(cols[j].name);
        if (it == lookup.end()) throw ArgumentError("new design lacks column '" + cols[j].name + "'");
        out += model.coefficients()(static_cast<Eigen::Index>(j)) * new_design.x().col(it->second);
    }
    return out;
}

double adjusted_r_squared(double r_squared, Eigen::Index n, Eigen::Index rank) {
    if (n <= rank) throw NumericalError("adjusted R^2 undefined: n <= rank");
    return 1.0 - (1.0 - r_squared) * static_cast<double>(n - 1) / static_cast<double>(n - rank);
}

double aic_full(Eigen::Index n, double rss, Eigen::Index rank) {
    if (!(rss > 0.0)) throw NumericalError("AIC undefined: residual sum of squares is zero");
    const double nn = static_cast<double>(n);
    return nn * std::log(2.0 * std::numbers::pi) + nn * std::log(rss / nn) + nn + 2.0 * static_cast<double>(rank + 1);
}

double aic_selection(Eigen::Index n, double rss, Eigen::Index rank, double penalty) {
    if (!(rss > 0.0)) throw NumericalError("AIC undefined: residual sum of squares is zero");
    const double nn = static_cast<double>(n);
    return nn * std::log(rss / nn) + penalty * static_cast<double>(rank);
}

double rss_floor(const Eigen::VectorXd& y) {
    return 1e-12 * total_sum_of_squares(y);
}

FitStatistics fit_statistics(const FittedModel& model, double penalty) {
    const auto n = model.n();
    const auto r = model.rank();
    if (n <= r) throw NumericalError("fit statistics undefined: n <= rank");
    if (model.rss() <= rss_floor(model.design().y())) {
        throw NumericalError("AIC undefined: residual sum of squares is at or below the floor (exact fit)");
    }
    FitStatistics s;
    const double tss = total_sum_of_squares(model.design().y());
    // an intercept-only fit explains nothing by definition
    s.r_squared = (r <= 1) ? 0.0 : 1.0 - model.rss() / tss;
    s.adj_r_squared = adjusted_r_squared(s.r_squared, n, r);
    s.aic_full = aic_full(n, model.rss(), r);
    s.aic_selection = aic_selection(n, model.rss(), r, penalty);
    s.sigma_hat = std::sqrt(model.rss() / static_cast<double>(n - r));
    return s;
}

FittedModel refit_log_response(const FittedModel& model) {
    const auto& y = model.design().y();
    Eigen::VectorXd logy(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(y(i) > 0.0)) {
            throw NumericalError("log transform needs a positive response; row " +
                                 model.design().row_ids()[static_cast<std::size_t>(i)] + " has " + std::to_string(y(i)));
        }
        logy(i) = std::log(y(i));
    }
    FittedModel refit = fit_ols(model.design().with_response(std::move(logy), "log(" + model.design().response_name() + ")"),
                                model.options_);
    refit.transform_ = ResponseTransform::log;
    return refit;
}

}  // namespace regsel
