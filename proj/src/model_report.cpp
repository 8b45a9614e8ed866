#include "regsel/model_report.hpp"

#include "regsel/error.hpp"
#include "regsel/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace regsel {

namespace {

std::string num(double v, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sig(double v, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string p_text(double p) {
    if (p < 2.2e-16) return "< 2e-16";
    if (p < 1e-4) return sig(p, 3);
    return num(p, 6);
}

std::string stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.1) return ".";
    return "";
}

}  // namespace

std::vector<CoefficientRow> coefficient_table(const FittedModel& model) {
    const auto df = model.n() - model.rank();
    if (df < 1) throw NumericalError("coefficient table needs n > rank");
    const double sigma = std::sqrt(model.rss() / static_cast<double>(df));
    const Eigen::VectorXd unscaled = model.unscaled_standard_errors();
    boost::math::students_t dist(static_cast<double>(df));

    std::vector<CoefficientRow> rows;
    const auto& cols = model.design().columns();
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        CoefficientRow row;
        row.name = cols[j].name;
        row.aliased = model.aliased()[j];
        row.estimate = model.coefficients()(jj);
        row.std_error = sigma * unscaled(jj);
        if (!row.aliased && row.std_error > 0.0) {
            row.t_value = row.estimate / row.std_error;
            row.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(row.t_value)));
        } else {
            row.t_value = std::numeric_limits<double>::quiet_NaN();
            row.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

std::string model_formula(const DesignMatrix& design) {
    std::string out = design.response_name() + " ~ ";
    if (design.terms().empty()) return out + "1";
    for (std::size_t t = 0; t < design.terms().size(); ++t) {
        if (t) out += " + ";
        out += design.terms()[t].name;
    }
    return out;
}

std::string model_report_text(const FittedModel& model) {
    const auto rows = coefficient_table(model);
    const auto stats = fit_statistics(model);
    std::ostringstream os;
    os << "Call:\nlm(formula = " << model_formula(model.design()) << ")\n\n";

    const auto& e = model.residuals();
    const auto s = five_number_summary(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())));
    os << "Residuals:\n";
    os << std::setw(12) << "Min" << std::setw(12) << "1Q" << std::setw(12) << "Median" << std::setw(12) << "3Q"
       << std::setw(12) << "Max" << "\n";
    os << std::setw(12) << num(s.min, 2) << std::setw(12) << num(s.q1, 2) << std::setw(12) << num(s.median, 2)
       << std::setw(12) << num(s.q3, 2) << std::setw(12) << num(s.max, 2) << "\n\n";

    std::size_t width = 12;
    for (const auto& r : rows) width = std::max(width, r.name.size() + 2);
    os << "Coefficients:\n";
    os << std::left << std::setw(static_cast<int>(width)) << "" << std::right << std::setw(12) << "Estimate"
       << std::setw(12) << "Std. Error" << std::setw(10) << "t value" << std::setw(12) << "Pr(>|t|)" << "\n";
    std::size_t n_aliased = 0;
    for (const auto& r : rows) {
        os << std::left << std::setw(static_cast<int>(width)) << r.name << std::right;
        if (r.aliased) {
            ++n_aliased;
            os << std::setw(12) << "NA" << std::setw(12) << "NA" << std::setw(10) << "NA" << std::setw(12) << "NA" << "\n";
            continue;
        }
        os << std::setw(12) << num(r.estimate) << std::setw(12) << num(r.std_error) << std::setw(10) << num(r.t_value, 3)
           << std::setw(12) << p_text(r.p_value) << " " << stars(r.p_value) << "\n";
    }
    if (n_aliased) os << "(" << n_aliased << " not defined because of singularities)\n";
    os << "---\nSignif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n\n";

    const auto df = model.n() - model.rank();
    os << "Residual standard error: " << sig(stats.sigma_hat) << " on " << df << " degrees of freedom\n";
    os << "Multiple R-squared:  " << sig(stats.r_squared) << ",\tAdjusted R-squared:  " << sig(stats.adj_r_squared)
       << "\n";
    const auto df_model = model.rank() - 1;
    if (df_model > 0) {
        const double f = (stats.r_squared / static_cast<double>(df_model)) /
                         ((1.0 - stats.r_squared) / static_cast<double>(df));
        boost::math::fisher_f dist(static_cast<double>(df_model), static_cast<double>(df));
        const double p = boost::math::cdf(boost::math::complement(dist, f));
        os << "F-statistic: " << sig(f) << " on " << df_model << " and " << df << " DF,  p-value: " << p_text(p) << "\n";
    }
    os << "AIC: " << num(stats.aic_full) << "\n";
    return os.str();
}

std::string model_report_delimited(const FittedModel& model) {
    std::ostringstream os;
    os << "term\testimate\tstd_error\tt_value\tp_value\n";
    for (const auto& r : coefficient_table(model)) {
        if (r.aliased) {
            os << r.name << "\tNA\tNA\tNA\tNA\n";
            continue;
        }
        os << r.name << "\t" << sig(r.estimate, 17) << "\t" << sig(r.std_error, 17) << "\t" << sig(r.t_value, 17) << "\t"
           << sig(r.p_value, 17) << "\n";
    }
    return os.str();
}

}  // namespace regsel
