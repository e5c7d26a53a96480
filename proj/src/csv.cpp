#include "modalfb/csv.hpp"

#include "modalfb/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace modalfb {

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

std::vector<double> CsvTable::column(const std::string& name) const
{
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) {
            std::vector<double> v;
            v.reserve(rows.size());
            for (const auto& r : rows) {
                v.push_back(r[c]);
            }
            return v;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "no column named " + name);
}

void write_csv(std::ostream& os, const CsvTable& t)
{
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        os << (c ? "," : "") << t.header[c];
    }
    os << "\n";
    char buf[40];
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) {
            throw Error(ErrorKind::DimensionMismatch, "row width differs from header");
        }
        for (std::size_t c = 0; c < r.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", r[c]);
            os << (c ? "," : "") << buf;
        }
        os << "\n";
    }
}

void write_csv(const std::string& path, const CsvTable& t)
{
    std::ofstream f(path);
    if (!f) {
        throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    }
    write_csv(f, t);
}

CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) {
        throw Error(ErrorKind::InvalidArgument, "empty csv input");
    }
    t.header = split(line);
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(lineno) + ": wrong number of cells");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (c.empty() || *end != '\0') {
                throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(lineno) + ": not a number '" + c + "'");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
    }
    return read_csv(f);
}

}  // namespace modalfb
