#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace matchfield {

using Cell = std::variant<std::int64_t, double, std::string>;

/// Column-named rows written as CSV or as a JSON array of objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

void write_csv(const Table &table, std::ostream &out);
void write_json(const Table &table, std::ostream &out);

/// Minimal reader for the CSV written by write_csv (no quoting needed: all
/// cells are numbers or simple labels). Returns the header and raw cells.
Table read_csv(std::istream &in);

} // namespace matchfield
