#include "levyflow/csv.hpp"

#include "levyflow/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace levyflow {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& file, const std::vector<std::string>& header)
    : out_(file, std::ios::binary), file_(file), columns_(header.size()) {
    if (!out_) throw Error("cannot write '" + file + "'");
    row(header);
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error("csv row width mismatch in '" + file_ + "'");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw Error("write failed for '" + file_ + "'");
}

CsvTable read_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot read '" + file + "'");
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

}  // namespace levyflow
