#pragma once

#include "regsel/table.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace regsel {

/// Column-to-role mapping read from a schema sidecar file.
struct Schema {
    struct Entry {
        ColumnRole role = ColumnRole::numeric;
        bool lenient = false;
    };
    std::map<std::string, Entry, std::less<>> entries;
    std::optional<Entry> default_entry;  // line "*<TAB>role"

    const Entry& lookup(const std::string& column) const;
};

/// Parses "name<TAB>role[<TAB>lenient]" lines. Blank lines and lines
/// starting with '#' are ignored.
Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(const std::string& text);

struct TableFormat {
    char delimiter = ',';
};

/// Loads a header-ed delimited file. Empty fields and the literal "NA" are
/// missing cells.
RawTable load_table(const std::filesystem::path& path, const Schema& schema, TableFormat format = {});
RawTable parse_table(const std::string& text, const Schema& schema, std::string table_name, TableFormat format = {});

/// Writes the table so that load_table(write_schema(...)) reproduces it
/// exactly (numbers use round-trip precision).
void write_table(const RawTable& table, const std::filesystem::path& path, TableFormat format = {});
void write_schema(const RawTable& table, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace regsel
