#pragma once

#include <string>
#include <vector>

namespace drclab::csv {

/// In-memory CSV: one header row plus data rows, all cells as text.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Throws std::invalid_argument on a width mismatch.
    void add_row(std::vector<std::string> cells);
    std::string serialize() const;
};

/// Canonical numeric cells: 17 significant digits for doubles so reruns are
/// byte-identical.
std::string cell(double v);
std::string cell(long long v);
std::string cell(unsigned long long v);

/// Parses header + rows with RFC-style quoting ("" escapes a quote inside a
/// quoted cell). Throws std::runtime_error on ragged rows or unterminated
/// quotes.
Table parse(const std::string& text);
Table parse_file(const std::string& path);
void write_file(const std::string& path, const Table& table);

enum class ColumnKind { Integer, Real, Text };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Text;
};

/// Empty string when the table matches the schema: exact header names in
/// order, every row full width, Integer/Real cells parseable as such.
/// Otherwise a one-line diagnostic naming the first offending cell.
std::string validate_schema(const Table& table, const std::vector<ColumnSpec>& schema);

}  // namespace drclab::csv
