#include "copcal/io.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "copcal/errors.hpp"

namespace copcal {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(strip(line.substr(start)));
      break;
    }
    fields.push_back(strip(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& field, int line, const char* column) {
  if (field.empty())
    throw CsvError(line, std::string("empty ") + column + " field");
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + field.size())
    throw CsvError(line, std::string("cannot parse ") + column + " value '" + field + "'");
  return value;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(0, "cannot open input file '" + path + "'");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw CsvError(1, "empty input file");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::string header = strip(line);
  bool raw_margins;
  if (header == "x,u1,u2")
    raw_margins = false;
  else if (header == "x,y1,y2")
    raw_margins = true;
  else
    throw CsvError(1, "expected header 'x,u1,u2' or 'x,y1,y2', got '" + header + "'");

  Dataset data;
  std::vector<double> y1, y2;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_row(line);
    if (fields.size() != 3)
      throw CsvError(line_no, "expected 3 comma-separated fields, got " +
                                  std::to_string(fields.size()));
    const double x = parse_number(fields[0], line_no, "x");
    if (raw_margins) {
      y1.push_back(parse_number(fields[1], line_no, "y1"));
      y2.push_back(parse_number(fields[2], line_no, "y2"));
    } else {
      const double u1 = parse_number(fields[1], line_no, "u1");
      const double u2 = parse_number(fields[2], line_no, "u2");
      if (!(u1 > 0) || !(u1 < 1))
        throw CsvError(line_no, "u1 must lie strictly inside (0,1)");
      if (!(u2 > 0) || !(u2 < 1))
        throw CsvError(line_no, "u2 must lie strictly inside (0,1)");
      data.u1.push_back(u1);
      data.u2.push_back(u2);
    }
    data.x.push_back(x);
  }
  if (raw_margins) {
    auto [u1, u2] = pseudo_observations(y1, y2);
    data.u1 = std::move(u1);
    data.u2 = std::move(u2);
  }
  return data;
}

}  // namespace copcal
