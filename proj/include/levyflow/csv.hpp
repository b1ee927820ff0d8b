#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace levyflow {

/// Numbers as %.17g so identical doubles give identical bytes.
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& file, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::string file_;
    std::size_t columns_;
};

/// Parsed CSV: header plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& file);

}  // namespace levyflow
