#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "modsurf/geometry.hpp"

namespace modsurf::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kValidation = 2, kTolerance = 3, kResource = 4 };

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

// decimal, 17 significant digits
std::string format_cell(const Cell& c);
std::string to_csv(const Table& t);

// "0.6+3i", "-2i", "1.5", "0.3-1.2i"
cplx parse_complex(const std::string& text);
Point parse_point(const std::string& text);
// "a:b:step" inclusive of b up to rounding
std::vector<double> parse_grid(const std::string& text);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace modsurf::cli
