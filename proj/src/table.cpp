#include "regsel/table.hpp"

#include "regsel/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace regsel {

std::string_view to_string(ColumnRole role) {
    switch (role) {
        case ColumnRole::id: return "id";
        case ColumnRole::numeric: return "numeric";
        case ColumnRole::factor: return "factor";
        case ColumnRole::response: return "response";
        case ColumnRole::exclude: return "exclude";
    }
    return "unknown";
}

ColumnRole parse_role(std::string_view text) {
    if (text == "id") return ColumnRole::id;
    if (text == "numeric") return ColumnRole::numeric;
    if (text == "factor") return ColumnRole::factor;
    if (text == "response") return ColumnRole::response;
    if (text == "exclude") return ColumnRole::exclude;
    throw DataError("unknown column role '" + std::string(text) + "'");
}

void AuditLog::append(const AuditLog& other) {
    dropped_columns.insert(dropped_columns.end(), other.dropped_columns.begin(), other.dropped_columns.end());
    dropped_rows.insert(dropped_rows.end(), other.dropped_rows.begin(), other.dropped_rows.end());
    unmatched.insert(unmatched.end(), other.unmatched.begin(), other.unmatched.end());
    coerced_factors.insert(coerced_factors.end(), other.coerced_factors.begin(), other.coerced_factors.end());
    notes.insert(notes.end(), other.notes.begin(), other.notes.end());
}

namespace {

void join_into(std::ostringstream& os, const std::vector<std::string>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        os << (i ? "," : "") << items[i];
    }
}

}  // namespace

std::string AuditLog::to_text() const {
    std::ostringstream os;
    os << "# dropped columns (missing >= ratio * rows): " << dropped_columns.size() << "\n";
    for (const auto& d : dropped_columns) {
        os << "dropped_column\t" << d.name << "\tmissing=" << d.missing << "\trows=" << d.rows << "\n";
    }
    os << "# unmatched ids\n";
    for (const auto& u : unmatched) {
        os << "unmatched\t" << u.left_table << "\tonly_in_left=" << u.only_left.size() << "\t";
        join_into(os, u.only_left);
        os << "\n";
        os << "unmatched\t" << u.right_table << "\tonly_in_right=" << u.only_right.size() << "\t";
        join_into(os, u.only_right);
        os << "\n";
    }
    os << "# dropped rows (incomplete): " << dropped_rows.size() << "\n";
    if (!dropped_rows.empty()) {
        os << "dropped_rows\t";
        join_into(os, dropped_rows);
        os << "\n";
    }
    os << "# coerced to factor: " << coerced_factors.size() << "\n";
    for (const auto& c : coerced_factors) os << "factor\t" << c << "\n";
    for (const auto& n : notes) os << "note\t" << n << "\n";
    return os.str();
}

bool Column::holds_numbers() const {
    return role == ColumnRole::numeric || role == ColumnRole::response;
}

std::size_t Column::size() const {
    return holds_numbers() ? numbers.size() : labels.size();
}

std::size_t Column::missing_count() const {
    if (holds_numbers()) {
        return static_cast<std::size_t>(std::count_if(numbers.begin(), numbers.end(), [](const auto& v) { return !v; }));
    }
    return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](const auto& v) { return !v; }));
}

bool Column::is_missing(std::size_t row) const {
    return holds_numbers() ? !numbers[row] : !labels[row];
}

Column Column::make_numeric(std::string name, ColumnRole role, std::vector<std::optional<double>> values) {
    Column c;
    c.name = std::move(name);
    c.role = role;
    c.numbers = std::move(values);
    return c;
}

Column Column::make_labels(std::string name, ColumnRole role, std::vector<std::optional<std::string>> values) {
    Column c;
    c.name = std::move(name);
    c.role = role;
    c.labels = std::move(values);
    if (role == ColumnRole::factor) c.levels = distinct_levels(c.labels);
    return c;
}

RawTable::RawTable(std::string name, std::vector<Column> columns, AuditLog audit)
    : name_(std::move(name)), columns_(std::move(columns)), audit_(std::move(audit)) {
    std::set<std::string> seen;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        auto& c = columns_[j];
        if (!seen.insert(c.name).second) throw DataError("duplicate column name '" + c.name + "'");
        if (c.holds_numbers() && !c.labels.empty()) throw DataError("column '" + c.name + "' mixes numbers and labels");
        if (!c.holds_numbers() && !c.numbers.empty()) throw DataError("column '" + c.name + "' mixes numbers and labels");
        if (j == 0) {
            rows_ = c.size();
        } else if (c.size() != rows_) {
            throw DataError("column '" + c.name + "' has " + std::to_string(c.size()) + " rows, expected " +
                            std::to_string(rows_));
        }
        if (c.role == ColumnRole::factor) {
            // keep a caller-supplied order, restricted to the labels observed
            auto observed = distinct_levels(c.labels);
            std::vector<std::string> ordered;
            for (const auto& l : c.levels) {
                if (std::binary_search(observed.begin(), observed.end(), l)) ordered.push_back(l);
            }
            for (const auto& l : observed) {
                if (std::find(ordered.begin(), ordered.end(), l) == ordered.end()) ordered.push_back(l);
            }
            c.levels = std::move(ordered);
        } else {
            c.levels.clear();
        }
    }
}

std::optional<std::size_t> RawTable::find(std::string_view column_name) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].name == column_name) return j;
    }
    return std::nullopt;
}

const Column& RawTable::column(std::string_view column_name) const {
    auto j = find(column_name);
    if (!j) throw DataError("no column named '" + std::string(column_name) + "' in table '" + name_ + "'");
    return columns_[*j];
}

namespace {

std::optional<std::size_t> find_unique_role(const std::vector<Column>& columns, ColumnRole role, const std::string& table) {
    std::optional<std::size_t> found;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].role != role) continue;
        if (found) {
            throw DataError("table '" + table + "' has more than one " + std::string(to_string(role)) + " column");
        }
        found = j;
    }
    return found;
}

}  // namespace

std::optional<std::size_t> RawTable::id_column() const {
    return find_unique_role(columns_, ColumnRole::id, name_);
}

std::optional<std::size_t> RawTable::response_column() const {
    return find_unique_role(columns_, ColumnRole::response, name_);
}

std::size_t RawTable::predictor_count() const {
    return static_cast<std::size_t>(
        std::count_if(columns_.begin(), columns_.end(), [](const Column& c) { return c.is_predictor(); }));
}

RawTable RawTable::take_rows(const std::vector<std::size_t>& rows) const {
    std::vector<Column> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) {
        Column t;
        t.name = c.name;
        t.role = c.role;
        t.lenient = c.lenient;
        t.levels = c.levels;
        if (c.holds_numbers()) {
            t.numbers.reserve(rows.size());
            for (auto r : rows) t.numbers.push_back(c.numbers.at(r));
        } else {
            t.labels.reserve(rows.size());
            for (auto r : rows) t.labels.push_back(c.labels.at(r));
        }
        out.push_back(std::move(t));
    }
    return RawTable(name_, std::move(out), audit_);
}

RawTable RawTable::with_columns(std::vector<Column> columns) const {
    return RawTable(name_, std::move(columns), audit_);
}

RawTable RawTable::with_audit(AuditLog audit) const {
    RawTable t = *this;
    t.audit_ = std::move(audit);
    return t;
}

std::vector<std::string> distinct_levels(const std::vector<std::optional<std::string>>& labels) {
    std::set<std::string> s;
    for (const auto& l : labels) {
        if (l) s.insert(*l);
    }
    return {s.begin(), s.end()};
}

std::string format_number(double value) {
    if (std::isfinite(value) && value == std::trunc(value) && std::fabs(value) < 1e15) {
        return std::to_string(static_cast<long long>(value));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::optional<double> parse_full_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

bool label_less(const std::string& a, const std::string& b) {
    auto na = parse_full_double(a);
    auto nb = parse_full_double(b);
    if (na && nb && *na != *nb) return *na < *nb;
    return a < b;
}

}  // namespace regsel
