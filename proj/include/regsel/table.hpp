#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regsel {

enum class ColumnRole { id, numeric, factor, response, exclude };

std::string_view to_string(ColumnRole role);
ColumnRole parse_role(std::string_view text);

/// Record of every destructive step applied while preparing a table.
struct AuditLog {
    struct DroppedColumn {
        std::string name;
        std::size_t missing = 0;
        std::size_t rows = 0;
    };
    struct UnmatchedIds {
        std::string left_table;
        std::string right_table;
        std::vector<std::string> only_left;
        std::vector<std::string> only_right;
    };

    std::vector<DroppedColumn> dropped_columns;
    std::vector<std::string> dropped_rows;  // ids of rows removed for missingness
    std::vector<UnmatchedIds> unmatched;
    std::vector<std::string> coerced_factors;
    std::vector<std::string> notes;

    void append(const AuditLog& other);
    std::string to_text() const;
};

/// One column of a RawTable. Numeric and response columns use `numbers`,
/// id and factor columns use `labels`; a disengaged optional marks a
/// missing cell.
struct Column {
    std::string name;
    ColumnRole role = ColumnRole::numeric;
    bool lenient = false;
    std::vector<std::optional<double>> numbers;
    std::vector<std::optional<std::string>> labels;
    std::vector<std::string> levels;  // factor columns only, sorted

    bool holds_numbers() const;
    std::size_t size() const;
    std::size_t missing_count() const;
    bool is_missing(std::size_t row) const;
    bool is_predictor() const { return role == ColumnRole::numeric || role == ColumnRole::factor; }

    static Column make_numeric(std::string name, ColumnRole role, std::vector<std::optional<double>> values);
    static Column make_labels(std::string name, ColumnRole role, std::vector<std::optional<std::string>> values);
};

/// Columnar table with per-column roles. Immutable once built; every
/// transform returns a new table carrying the accumulated audit log.
class RawTable {
public:
    RawTable() = default;
    RawTable(std::string name, std::vector<Column> columns, AuditLog audit = {});

    const std::string& name() const { return name_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(std::size_t j) const { return columns_.at(j); }
    const AuditLog& audit() const { return audit_; }

    std::optional<std::size_t> find(std::string_view column_name) const;
    const Column& column(std::string_view column_name) const;
    std::optional<std::size_t> id_column() const;
    std::optional<std::size_t> response_column() const;
    std::size_t predictor_count() const;

    /// Row indices in the given order; used by merges and row filters.
    RawTable take_rows(const std::vector<std::size_t>& rows) const;
    RawTable with_columns(std::vector<Column> columns) const;
    RawTable with_audit(AuditLog audit) const;

private:
    std::string name_;
    std::vector<Column> columns_;
    AuditLog audit_;
    std::size_t rows_ = 0;
};

/// Sorted distinct non-missing labels.
std::vector<std::string> distinct_levels(const std::vector<std::optional<std::string>>& labels);

/// Renders a number the way factor levels and ids are labelled: integers
/// without a decimal point, everything else with round-trip precision.
std::string format_number(double value);

/// Ordering used for ids and factor levels: numeric when both labels parse
/// as numbers, lexicographic otherwise.
bool label_less(const std::string& a, const std::string& b);

}  // namespace regsel
