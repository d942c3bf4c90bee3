#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace revlab::cli {

/// Residuals and other quantities printed in scientific notation.
struct Sci {
    double value;
};

using Cell = std::variant<std::string, double, Sci, long long>;

struct Table {
    std::string name;  // default file stem under REVLAB_OUT_DIR
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    bool record = false;  // one row written as a JSON object rather than an array

    void add(std::vector<Cell> row);
};

enum class Format { Csv, Json };

/// Six significant digits for plain numbers, %.5e for Sci.
std::string format_cell(const Cell& c);

void write_csv(std::ostream& out, const Table& t);
void write_json(std::ostream& out, const Table& t);
void write(std::ostream& out, const Table& t, Format f);

}  // namespace revlab::cli
