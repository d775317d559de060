#include "matchfield/table.hpp"

#include "matchfield/errors.hpp"

#include <charconv>
#include <istream>
#include <json.hpp>
#include <ostream>

namespace matchfield {

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell &c)
{
    if (const auto *i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    if (const auto *d = std::get_if<double>(&c))
        return format_double(*d);
    return std::get<std::string>(c);
}

} // namespace

void write_csv(const Table &table, std::ostream &out)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << cell_text(row[i]);
        out << '\n';
    }
}

void write_json(const Table &table, std::ostream &out)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto &row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size() && i < table.columns.size(); ++i)
            std::visit([&](const auto &v) { obj[table.columns[i]] = v; }, row[i]);
        arr.push_back(std::move(obj));
    }
    out << arr.dump(1) << '\n';
}

Table read_csv(std::istream &in)
{
    auto split = [](const std::string &line) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find(',', start);
            parts.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos)
                break;
            start = pos + 1;
        }
        return parts;
    };
    Table t;
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty CSV");
    t.columns = split(line);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto parts = split(line);
        if (parts.size() != t.columns.size())
            throw ParseError("CSV row has the wrong number of cells");
        std::vector<Cell> row;
        for (auto &p : parts)
            row.emplace_back(std::move(p));
        t.add(std::move(row));
    }
    return t;
}

} // namespace matchfield
