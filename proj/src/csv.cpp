#include "drclab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drclab::csv {

namespace {

bool needs_quoting(const std::string& cell) {
    return cell.find_first_of(",\"\n\r") != std::string::npos;
}

std::string render_cell(const std::string& cell) {
    if (!needs_quoting(cell)) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

void render_row(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += render_cell(cells[i]);
    }
    out += '\n';
}

bool parse_real(const std::string& cell) {
    if (cell.empty()) return false;
    const char* begin = cell.data() + (cell.front() == '+' || cell.front() == '-' ? 1 : 0);
    double v = 0.0;
    const auto res = std::from_chars(begin, cell.data() + cell.size(), v);
    return res.ec == std::errc{} && res.ptr == cell.data() + cell.size();
}

bool parse_integer(const std::string& cell) {
    if (cell.empty()) return false;
    const char* begin = cell.data() + (cell.front() == '+' || cell.front() == '-' ? 1 : 0);
    unsigned long long v = 0;
    const auto res = std::from_chars(begin, cell.data() + cell.size(), v);
    return res.ec == std::errc{} && res.ptr == cell.data() + cell.size();
}

}  // namespace

void Table::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw std::invalid_argument("csv row has " + std::to_string(cells.size()) +
                                    " cells, expected " + std::to_string(columns.size()));
    rows.push_back(std::move(cells));
}

std::string Table::serialize() const {
    std::string out;
    render_row(out, columns);
    for (const auto& row : rows) render_row(out, row);
    return out;
}

std::string cell(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(long long v) { return std::to_string(v); }

std::string cell(unsigned long long v) { return std::to_string(v); }

Table parse(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string current;
    bool in_quotes = false;
    bool cell_started = false;

    const auto end_cell = [&] {
        record.push_back(current);
        current.clear();
        cell_started = false;
    };
    const auto end_record = [&] {
        end_cell();
        records.push_back(record);
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                current += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (cell_started && !current.empty())
                    throw std::runtime_error("csv: quote inside an unquoted cell");
                in_quotes = true;
                cell_started = true;
                break;
            case ',': end_cell(); cell_started = false; break;
            case '\r': break;
            case '\n': end_record(); break;
            default:
                current += c;
                cell_started = true;
        }
    }
    if (in_quotes) throw std::runtime_error("csv: unterminated quoted cell");
    if (cell_started || !record.empty()) end_record();

    if (records.empty()) throw std::runtime_error("csv: missing header row");
    Table table;
    table.columns = records.front();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.columns.size())
            throw std::runtime_error("csv: row " + std::to_string(r) + " has " +
                                     std::to_string(records[r].size()) + " cells, expected " +
                                     std::to_string(table.columns.size()));
        table.rows.push_back(records[r]);
    }
    return table;
}

Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open csv file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void write_file(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << table.serialize();
}

std::string validate_schema(const Table& table, const std::vector<ColumnSpec>& schema) {
    if (table.columns.size() != schema.size())
        return "expected " + std::to_string(schema.size()) + " columns, found " +
               std::to_string(table.columns.size());
    for (std::size_t c = 0; c < schema.size(); ++c)
        if (table.columns[c] != schema[c].name)
            return "column " + std::to_string(c) + " is '" + table.columns[c] + "', expected '" +
                   schema[c].name + "'";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const std::string& value = table.rows[r][c];
            const bool ok = schema[c].kind == ColumnKind::Text ||
                            (schema[c].kind == ColumnKind::Integer ? parse_integer(value)
                                                                   : parse_real(value));
            if (!ok)
                return "row " + std::to_string(r) + ", column '" + schema[c].name +
                       "': '" + value + "' is not " +
                       (schema[c].kind == ColumnKind::Integer ? "an integer" : "a number");
        }
    }
    return {};
}

}  // namespace drclab::csv
