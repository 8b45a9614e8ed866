#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regsel {

enum class TermKind { numeric, factor };

/// Columns of the design generated by one source variable. A factor with L
/// levels owns L-1 indicator columns; `levels` keeps all L labels with the
/// reference level first.
struct TermGroup {
    std::string name;
    TermKind kind = TermKind::numeric;
    std::vector<std::size_t> columns;
    std::vector<std::string> levels;
};

struct DesignColumn {
    std::string name;             // "(Intercept)", "x1", "h_cohort2", ...
    std::string source;           // source variable, empty for the intercept
    std::string level;            // indicator level, empty otherwise
    std::optional<std::size_t> term;
};

inline constexpr std::string_view kInterceptName = "(Intercept)";

/// Fully numeric model matrix. Column 0 is always the intercept.
class DesignMatrix {
public:
    DesignMatrix() = default;
    DesignMatrix(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<DesignColumn> columns, std::vector<TermGroup> terms,
                 std::string response_name, std::vector<std::string> row_ids);

    /// Intercept-only design on the given response.
    static DesignMatrix intercept_only(Eigen::VectorXd y, std::string response_name = "y");

    /// Builds a design from plain numeric predictors (one term per column).
    static DesignMatrix from_numeric(const Eigen::MatrixXd& predictors, Eigen::VectorXd y,
                                     std::vector<std::string> names = {}, std::string response_name = "y");

    Eigen::Index rows() const { return x_.rows(); }
    Eigen::Index cols() const { return x_.cols(); }
    const Eigen::MatrixXd& x() const { return x_; }
    const Eigen::VectorXd& y() const { return y_; }
    const std::vector<DesignColumn>& columns() const { return columns_; }
    const std::vector<TermGroup>& terms() const { return terms_; }
    const std::string& response_name() const { return response_name_; }
    const std::vector<std::string>& row_ids() const { return row_ids_; }

    std::optional<std::size_t> term_index(std::string_view name) const;
    std::vector<std::string> term_names() const;
    std::size_t numeric_term_count() const;

    /// Keeps the intercept plus the listed terms, in this design's term order.
    DesignMatrix select_terms(const std::vector<std::size_t>& term_indices) const;
    DesignMatrix select_terms_by_name(const std::vector<std::string>& names) const;
    DesignMatrix select_rows(const std::vector<std::size_t>& rows) const;
    DesignMatrix without_rows(const std::vector<std::size_t>& rows) const;
    DesignMatrix with_response(Eigen::VectorXd y, std::string response_name) const;

    /// Column indices (into x()) of the listed terms, intercept excluded.
    std::vector<std::size_t> columns_of(const std::vector<std::size_t>& term_indices) const;

    /// Recovers the factor labels of a factor term from its indicator block.
    std::vector<std::string> decode_factor(std::size_t term) const;

private:
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    std::vector<DesignColumn> columns_;
    std::vector<TermGroup> terms_;
    std::string response_name_;
    std::vector<std::string> row_ids_;
};

}  // namespace regsel
