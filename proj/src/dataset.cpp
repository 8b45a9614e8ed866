#include "regsel/dataset.hpp"

#include "regsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace regsel {

RawTable drop_sparse_columns(const RawTable& table, double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw ArgumentError("missing-data ratio must lie in [0, 1]");
    if (table.rows() == 0) throw DataError(table.name() + ": cannot filter an empty table");

    AuditLog audit = table.audit();
    std::vector<Column> kept;
    const double limit = ratio * static_cast<double>(table.rows());
    std::size_t predictors = 0;
    for (const auto& c : table.columns()) {
        if (!c.is_predictor()) {
            kept.push_back(c);
            continue;
        }
        ++predictors;
        const auto missing = c.missing_count();
        if (static_cast<double>(missing) >= limit) {
            audit.dropped_columns.push_back({c.name, missing, table.rows()});
        } else {
            kept.push_back(c);
        }
    }
    RawTable out(table.name(), std::move(kept), std::move(audit));
    if (predictors > 0 && out.predictor_count() == 0) throw DataError(table.name() + ": no predictors remain");
    return out;
}

namespace {

std::map<std::string, std::size_t, decltype(&label_less)> index_ids(const RawTable& t, const Column& id) {
    std::map<std::string, std::size_t, decltype(&label_less)> index(&label_less);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        if (!id.labels[i]) throw DataError(t.name() + ": missing id at row " + std::to_string(i + 1));
        if (!index.emplace(*id.labels[i], i).second) {
            throw DataError(t.name() + ": duplicate id '" + *id.labels[i] + "'");
        }
    }
    return index;
}

}  // namespace

RawTable merge_by_id(const RawTable& a, const RawTable& b) {
    auto ida = a.id_column();
    auto idb = b.id_column();
    if (!ida || !idb) throw DataError("merge requires an id column in both tables");
    const auto& ca = a.column(*ida);
    const auto& cb = b.column(*idb);
    if (ca.name != cb.name) throw DataError("id columns differ in name: '" + ca.name + "' vs '" + cb.name + "'");
    for (const auto& c : b.columns()) {
        if (c.role != ColumnRole::id && a.find(c.name)) {
            throw DataError("column '" + c.name + "' appears in both '" + a.name() + "' and '" + b.name() + "'");
        }
    }

    const auto index_a = index_ids(a, ca);
    const auto index_b = index_ids(b, cb);

    AuditLog::UnmatchedIds unmatched{a.name(), b.name(), {}, {}};
    std::vector<std::size_t> rows_a;
    std::vector<std::size_t> rows_b;
    for (const auto& [id, row] : index_a) {
        auto it = index_b.find(id);
        if (it == index_b.end()) {
            unmatched.only_left.push_back(id);
        } else {
            rows_a.push_back(row);
            rows_b.push_back(it->second);
        }
    }
    for (const auto& [id, row] : index_b) {
        if (!index_a.count(id)) unmatched.only_right.push_back(id);
    }

    RawTable ta = a.take_rows(rows_a);
    RawTable tb = b.take_rows(rows_b);
    std::vector<Column> cols = ta.columns();
    for (const auto& c : tb.columns()) {
        if (c.role != ColumnRole::id) cols.push_back(c);
    }
    AuditLog audit = a.audit();
    audit.append(b.audit());
    audit.unmatched.push_back(std::move(unmatched));
    return RawTable(a.name() + "+" + b.name(), std::move(cols), std::move(audit));
}

RawTable drop_incomplete_rows(const RawTable& table) {
    std::vector<std::size_t> keep;
    AuditLog audit = table.audit();
    auto id = table.id_column();
    for (std::size_t i = 0; i < table.rows(); ++i) {
        bool complete = true;
        for (const auto& c : table.columns()) {
            if (c.role != ColumnRole::exclude && c.is_missing(i)) {
                complete = false;
                break;
            }
        }
        if (complete) {
            keep.push_back(i);
        } else {
            const auto& label = id ? table.column(*id).labels[i] : std::optional<std::string>{};
            audit.dropped_rows.push_back(label ? *label : "row" + std::to_string(i + 1));
        }
    }
    if (keep.empty()) throw DataError("empty dataset after NA omission");
    return table.take_rows(keep).with_audit(std::move(audit));
}

namespace {

Column to_factor(const Column& c, std::size_t max_levels) {
    std::set<double> values;
    for (const auto& v : c.numbers) {
        if (v) values.insert(*v);
    }
    if (values.size() > max_levels) {
        throw DataError("column '" + c.name + "' has " + std::to_string(values.size()) +
                        " distinct values, more than max_levels=" + std::to_string(max_levels));
    }
    std::vector<std::optional<std::string>> labels;
    labels.reserve(c.numbers.size());
    for (const auto& v : c.numbers) {
        if (v) labels.emplace_back(format_number(*v));
        else labels.emplace_back();
    }
    Column f = Column::make_labels(c.name, ColumnRole::factor, std::move(labels));
    // numeric order, not lexicographic, for coerced values
    f.levels.clear();
    for (double v : values) f.levels.push_back(format_number(v));
    return f;
}

bool is_binary(const Column& c) {
    return std::all_of(c.numbers.begin(), c.numbers.end(), [](const auto& v) { return !v || *v == 0.0 || *v == 1.0; });
}

}  // namespace

RawTable coerce_to_factor(const RawTable& table, const FactorSelection& selection, std::size_t max_levels) {
    std::vector<bool> coerce(table.cols(), false);
    if (const auto* names = std::get_if<std::vector<std::string>>(&selection)) {
        for (const auto& n : *names) {
            auto j = table.find(n);
            if (!j) throw DataError("cannot coerce unknown column '" + n + "'");
            if (table.column(*j).role != ColumnRole::numeric) {
                throw DataError("cannot coerce column '" + n + "': not a numeric predictor");
            }
            coerce[*j] = true;
        }
    } else {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            const auto& c = table.column(j);
            coerce[j] = c.role == ColumnRole::numeric && is_binary(c);
        }
    }

    AuditLog audit = table.audit();
    std::vector<Column> cols;
    cols.reserve(table.cols());
    for (std::size_t j = 0; j < table.cols(); ++j) {
        if (coerce[j]) {
            cols.push_back(to_factor(table.column(j), max_levels));
            audit.coerced_factors.push_back(table.column(j).name);
        } else {
            cols.push_back(table.column(j));
        }
    }
    return RawTable(table.name(), std::move(cols), std::move(audit));
}

DesignMatrix encode_design(const RawTable& table) {
    auto resp = table.response_column();
    if (!resp) throw DataError(table.name() + ": no response column");
    auto id = table.id_column();
    const auto n = table.rows();
    if (n == 0) throw DataError(table.name() + ": no rows to encode");

    const auto& rc = table.column(*resp);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!rc.numbers[i]) throw DataError("response '" + rc.name + "' has a missing value at row " + std::to_string(i + 1));
        y(static_cast<Eigen::Index>(i)) = *rc.numbers[i];
    }
    std::vector<std::string> row_ids;
    if (id) {
        for (const auto& l : table.column(*id).labels) row_ids.push_back(l.value_or(""));
    }

    std::vector<DesignColumn> cols{{std::string(kInterceptName), "", "", std::nullopt}};
    std::vector<TermGroup> terms;
    std::vector<std::vector<double>> data;
    data.emplace_back(n, 1.0);

    for (const auto& c : table.columns()) {
        if (!c.is_predictor()) continue;
        const std::size_t t = terms.size();
        if (c.role == ColumnRole::numeric) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (!c.numbers[i]) throw DataError("column '" + c.name + "' has a missing value at row " + std::to_string(i + 1));
                v[i] = *c.numbers[i];
            }
            terms.push_back({c.name, TermKind::numeric, {data.size()}, {}});
            cols.push_back({c.name, c.name, "", t});
            data.push_back(std::move(v));
            continue;
        }
        if (c.levels.size() < 2) {
            throw DataError("factor '" + c.name + "' has a single level and no variance");
        }
        TermGroup g{c.name, TermKind::factor, {}, c.levels};
        std::map<std::string, std::size_t> level_index;
        for (std::size_t k = 0; k < c.levels.size(); ++k) level_index[c.levels[k]] = k;
        std::vector<std::vector<double>> block(c.levels.size() - 1, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            if (!c.labels[i]) throw DataError("column '" + c.name + "' has a missing value at row " + std::to_string(i + 1));
            const auto k = level_index.at(*c.labels[i]);
            if (k > 0) block[k - 1][i] = 1.0;
        }
        for (std::size_t k = 1; k < c.levels.size(); ++k) {
            g.columns.push_back(data.size());
            cols.push_back({c.name + c.levels[k], c.name, c.levels[k], t});
            data.push_back(std::move(block[k - 1]));
        }
        terms.push_back(std::move(g));
    }
    if (terms.empty()) throw DataError(table.name() + ": zero predictors to encode");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(data.size()));
    for (std::size_t j = 0; j < data.size(); ++j) {
        x.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(data[j].data(), static_cast<Eigen::Index>(n));
    }
    return DesignMatrix(std::move(x), std::move(y), std::move(cols), std::move(terms), rc.name, std::move(row_ids));
}

}  // namespace regsel
