#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace modalfb {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;
};

// %.17g so that reading back restores every double exactly
void write_csv(std::ostream& os, const CsvTable& t);
void write_csv(const std::string& path, const CsvTable& t);
CsvTable read_csv(std::istream& is);
CsvTable read_csv(const std::string& path);

}  // namespace modalfb
