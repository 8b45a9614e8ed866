#include "regsel/design.hpp"

#include "regsel/error.hpp"

#include <algorithm>

namespace regsel {

DesignMatrix::DesignMatrix(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<DesignColumn> columns,
                           std::vector<TermGroup> terms, std::string response_name, std::vector<std::string> row_ids)
    : x_(std::move(x)),
      y_(std::move(y)),
      columns_(std::move(columns)),
      terms_(std::move(terms)),
      response_name_(std::move(response_name)),
      row_ids_(std::move(row_ids)) {
    const auto n = x_.rows();
    const auto p = x_.cols();
    if (n <= 0) throw ArgumentError("design has no rows");
    if (p < 1) throw ArgumentError("design has no columns");
    if (y_.size() != n) throw ArgumentError("response length does not match design rows");
    if (static_cast<Eigen::Index>(columns_.size()) != p) throw ArgumentError("column metadata does not match design width");
    if (row_ids_.empty()) {
        row_ids_.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) row_ids_.push_back(std::to_string(i + 1));
    }
    if (static_cast<Eigen::Index>(row_ids_.size()) != n) throw ArgumentError("row id count does not match design rows");
    if (!(x_.col(0).array() == 1.0).all() || columns_[0].term) {
        throw ArgumentError("first design column must be the all-ones intercept");
    }

    std::vector<int> owner(static_cast<std::size_t>(p), -1);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const auto& g = terms_[t];
        if (g.columns.empty()) throw ArgumentError("term '" + g.name + "' owns no columns");
        if (g.kind == TermKind::factor && g.levels.size() != g.columns.size() + 1) {
            throw ArgumentError("factor term '" + g.name + "' must own levels-1 columns");
        }
        for (auto c : g.columns) {
            if (c == 0 || c >= static_cast<std::size_t>(p)) throw ArgumentError("term '" + g.name + "' column out of range");
            if (owner[c] != -1) throw ArgumentError("design column claimed by two terms");
            owner[c] = static_cast<int>(t);
            if (columns_[c].term != t) throw ArgumentError("column metadata disagrees with term '" + g.name + "'");
        }
    }
    for (Eigen::Index c = 1; c < p; ++c) {
        if (owner[static_cast<std::size_t>(c)] == -1) {
            throw ArgumentError("design column '" + columns_[static_cast<std::size_t>(c)].name + "' has no term");
        }
    }
}

DesignMatrix DesignMatrix::intercept_only(Eigen::VectorXd y, std::string response_name) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(y.size(), 1);
    std::vector<DesignColumn> cols{{std::string(kInterceptName), "", "", std::nullopt}};
    return DesignMatrix(std::move(x), std::move(y), std::move(cols), {}, std::move(response_name), {});
}

DesignMatrix DesignMatrix::from_numeric(const Eigen::MatrixXd& predictors, Eigen::VectorXd y,
                                        std::vector<std::string> names, std::string response_name) {
    const auto n = predictors.rows();
    const auto k = predictors.cols();
    if (names.empty()) {
        for (Eigen::Index j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(names.size()) != k) throw ArgumentError("predictor name count mismatch");
    Eigen::MatrixXd x(n, k + 1);
    x.col(0).setOnes();
    x.rightCols(k) = predictors;
    std::vector<DesignColumn> cols{{std::string(kInterceptName), "", "", std::nullopt}};
    std::vector<TermGroup> terms;
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto t = static_cast<std::size_t>(j);
        cols.push_back({names[t], names[t], "", t});
        terms.push_back({names[t], TermKind::numeric, {t + 1}, {}});
    }
    return DesignMatrix(std::move(x), std::move(y), std::move(cols), std::move(terms), std::move(response_name), {});
}

std::optional<std::size_t> DesignMatrix::term_index(std::string_view name) const {
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        if (terms_[t].name == name) return t;
    }
    return std::nullopt;
}

std::vector<std::string> DesignMatrix::term_names() const {
    std::vector<std::string> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) out.push_back(t.name);
    return out;
}

std::size_t DesignMatrix::numeric_term_count() const {
    return static_cast<std::size_t>(
        std::count_if(terms_.begin(), terms_.end(), [](const TermGroup& g) { return g.kind == TermKind::numeric; }));
}

std::vector<std::size_t> DesignMatrix::columns_of(const std::vector<std::size_t>& term_indices) const {
    std::vector<std::size_t> cols;
    for (auto t : term_indices) {
        const auto& g = terms_.at(t);
        cols.insert(cols.end(), g.columns.begin(), g.columns.end());
    }
    return cols;
}

DesignMatrix DesignMatrix::select_terms(const std::vector<std::size_t>& term_indices) const {
    std::vector<std::size_t> sorted = term_indices;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<std::size_t> keep{0};
    std::vector<DesignColumn> cols{columns_[0]};
    std::vector<TermGroup> terms;
    for (auto t : sorted) {
        if (t >= terms_.size()) throw ArgumentError("term index out of range");
        TermGroup g = terms_[t];
        g.columns.clear();
        for (auto c : terms_[t].columns) {
            g.columns.push_back(keep.size());
            keep.push_back(c);
            DesignColumn dc = columns_[c];
            dc.term = terms.size();
            cols.push_back(std::move(dc));
        }
        terms.push_back(std::move(g));
    }
    Eigen::MatrixXd x(rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = x_.col(static_cast<Eigen::Index>(keep[j]));
    return DesignMatrix(std::move(x), y_, std::move(cols), std::move(terms), response_name_, row_ids_);
}

DesignMatrix DesignMatrix::select_terms_by_name(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) {
        auto t = term_index(n);
        if (!t) throw ArgumentError("design has no term named '" + n + "'");
        idx.push_back(*t);
    }
    return select_terms(idx);
}

DesignMatrix DesignMatrix::select_rows(const std::vector<std::size_t>& rows) const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), cols());
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= static_cast<std::size_t>(this->rows())) throw ArgumentError("row index out of range");
        const auto r = static_cast<Eigen::Index>(rows[i]);
        x.row(static_cast<Eigen::Index>(i)) = x_.row(r);
        y(static_cast<Eigen::Index>(i)) = y_(r);
        ids.push_back(row_ids_[rows[i]]);
    }
    return DesignMatrix(std::move(x), std::move(y), columns_, terms_, response_name_, std::move(ids));
}

DesignMatrix DesignMatrix::without_rows(const std::vector<std::size_t>& rows) const {
    std::vector<bool> drop(static_cast<std::size_t>(this->rows()), false);
    for (auto r : rows) {
        if (r >= drop.size()) throw ArgumentError("excluded row " + std::to_string(r + 1) + " is out of range");
        drop[r] = true;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < drop.size(); ++i) {
        if (!drop[i]) keep.push_back(i);
    }
    return select_rows(keep);
}

DesignMatrix DesignMatrix::with_response(Eigen::VectorXd y, std::string response_name) const {
    return DesignMatrix(x_, std::move(y), columns_, terms_, std::move(response_name), row_ids_);
}

std::vector<std::string> DesignMatrix::decode_factor(std::size_t term) const {
    const auto& g = terms_.at(term);
    if (g.kind != TermKind::factor) throw ArgumentError("term '" + g.name + "' is not a factor");
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(rows()));
    for (Eigen::Index i = 0; i < rows(); ++i) {
        std::size_t level = 0;
        for (std::size_t k = 0; k < g.columns.size(); ++k) {
            if (x_(i, static_cast<Eigen::Index>(g.columns[k])) != 0.0) {
                level = k + 1;
                break;
            }
        }
        out.push_back(g.levels[level]);
    }
    return out;
}

}  // namespace regsel
