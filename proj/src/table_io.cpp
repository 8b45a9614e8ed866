#include "regsel/table_io.hpp"

#include "regsel/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace regsel {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == delim) {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

bool is_missing_token(const std::string& field) {
    return field.empty() || field == "NA";
}

std::optional<double> parse_number(const std::string& field) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

std::string quote_if_needed(const std::string& s, char delim) {
    if (s.find(delim) == std::string::npos && s.find('"') == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const Schema::Entry& Schema::lookup(const std::string& column) const {
    auto it = entries.find(column);
    if (it != entries.end()) return it->second;
    if (default_entry) return *default_entry;
    throw DataError("column '" + column + "' is not declared in the schema and no default role is set");
}

Schema parse_schema(const std::string& text) {
    Schema schema;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split_fields(t, '\t');
        if (fields.size() < 2 || fields.size() > 3) {
            throw DataError("schema line " + std::to_string(lineno) + ": expected name<TAB>role[<TAB>lenient]");
        }
        Schema::Entry e;
        e.role = parse_role(trim(fields[1]));
        if (fields.size() == 3) {
            if (trim(fields[2]) != "lenient") {
                throw DataError("schema line " + std::to_string(lineno) + ": unknown flag '" + fields[2] + "'");
            }
            e.lenient = true;
        }
        auto name = trim(fields[0]);
        if (name == "*") {
            schema.default_entry = e;
        } else if (!schema.entries.emplace(name, e).second) {
            throw DataError("schema line " + std::to_string(lineno) + ": column '" + name + "' declared twice");
        }
    }
    return schema;
}

Schema load_schema(const std::filesystem::path& path) {
    return parse_schema(read_text_file(path));
}

RawTable parse_table(const std::string& text, const Schema& schema, std::string table_name, TableFormat format) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw DataError(table_name + ": missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    auto headers = split_fields(line, format.delimiter);
    std::set<std::string> seen;
    for (auto& h : headers) {
        h = trim(h);
        if (!seen.insert(h).second) throw DataError(table_name + ": duplicate column name '" + h + "'");
    }

    std::vector<Schema::Entry> roles;
    roles.reserve(headers.size());
    for (const auto& h : headers) roles.push_back(schema.lookup(h));

    std::vector<std::vector<std::string>> cells(headers.size());
    std::size_t lineno = 1;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, format.delimiter);
        if (fields.size() != headers.size()) {
            throw DataError(table_name + ": line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(headers.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) cells[j].push_back(trim(fields[j]));
        ++row;
    }
    if (row == 0) throw DataError(table_name + ": no data rows");

    std::vector<Column> columns;
    columns.reserve(headers.size());
    for (std::size_t j = 0; j < headers.size(); ++j) {
        const auto& entry = roles[j];
        Column c;
        if (entry.role == ColumnRole::numeric || entry.role == ColumnRole::response) {
            std::vector<std::optional<double>> values;
            values.reserve(row);
            for (std::size_t i = 0; i < cells[j].size(); ++i) {
                const auto& f = cells[j][i];
                if (is_missing_token(f)) {
                    values.emplace_back();
                    continue;
                }
                auto v = parse_number(f);
                if (!v) {
                    if (!entry.lenient) {
                        throw DataError(table_name + ": non-numeric value '" + f + "' in column '" + headers[j] +
                                        "' at data row " + std::to_string(i + 1));
                    }
                    values.emplace_back();
                } else {
                    values.push_back(*v);
                }
            }
            c = Column::make_numeric(headers[j], entry.role, std::move(values));
        } else {
            std::vector<std::optional<std::string>> values;
            values.reserve(row);
            for (const auto& f : cells[j]) {
                if (is_missing_token(f)) {
                    values.emplace_back();
                } else {
                    values.emplace_back(f);
                }
            }
            c = Column::make_labels(headers[j], entry.role, std::move(values));
        }
        c.lenient = entry.lenient;
        columns.push_back(std::move(c));
    }
    return RawTable(std::move(table_name), std::move(columns));
}

RawTable load_table(const std::filesystem::path& path, const Schema& schema, TableFormat format) {
    return parse_table(read_text_file(path), schema, path.stem().string(), format);
}

void write_table(const RawTable& table, const std::filesystem::path& path, TableFormat format) {
    std::ostringstream os;
    for (std::size_t j = 0; j < table.cols(); ++j) {
        os << (j ? std::string(1, format.delimiter) : "") << quote_if_needed(table.column(j).name, format.delimiter);
    }
    os << "\n";
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            const auto& c = table.column(j);
            if (j) os << format.delimiter;
            if (c.holds_numbers()) {
                if (c.numbers[i]) os << format_cell(*c.numbers[i]);
                else os << "NA";
            } else {
                if (c.labels[i]) os << quote_if_needed(*c.labels[i], format.delimiter);
                else os << "NA";
            }
        }
        os << "\n";
    }
    write_text_file(path, os.str());
}

void write_schema(const RawTable& table, const std::filesystem::path& path) {
    std::ostringstream os;
    for (const auto& c : table.columns()) {
        os << c.name << "\t" << to_string(c.role);
        if (c.lenient) os << "\tlenient";
        os << "\n";
    }
    write_text_file(path, os.str());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file '" + path.string() + "'");
    out << text;
}

}  // namespace regsel
