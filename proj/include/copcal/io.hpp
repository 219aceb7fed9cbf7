#pragma once

#include <string>

#include "copcal/fit.hpp"

namespace copcal {

inline constexpr const char* kVersion = "0.1.0";

// Reads a CSV with header "x,u1,u2" (UTF-8, '.' decimal, LF or CRLF). A
// header of "x,y1,y2" instead triggers the rank-based pseudo-observation
// transform of the last two columns. Throws CsvError with the offending
// 1-based file line on malformed rows or u values outside (0,1).
Dataset read_dataset_csv(const std::string& path);

}  // namespace copcal
