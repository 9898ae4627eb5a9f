#include "empcosmo/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace empcosmo::io {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::vector<double>& Table::col(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw std::invalid_argument("csv: missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Table read_csv(const std::string& path, const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw std::invalid_argument("csv: empty input file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Table t;
  t.header = split_csv_line(line);
  if (!expected.empty() && t.header != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i)
      want += (i ? "," : "") + expected[i];
    throw std::invalid_argument("csv: malformed header in '" + path + "' (expected '" +
                             want + "', got '" + line + "')");
  }
  t.columns.assign(t.header.size(), {});
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != t.header.size())
      throw std::invalid_argument("csv: wrong field count at line " +
                               std::to_string(lineno) + " of '" + path + "'");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(fields[i], &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("csv: non-numeric field at line " +
                                 std::to_string(lineno) + " of '" + path + "'");
      }
      if (used != fields[i].size())
        throw std::invalid_argument("csv: trailing junk at line " +
                                 std::to_string(lineno) + " of '" + path + "'");
      t.columns[i].push_back(v);
    }
  }
  if (t.rows() == 0)
    throw std::invalid_argument("csv: no data rows in '" + path + "'");
  return t;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns) {
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns[0]->size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      os << (c ? "," : "") << format_g17((*columns[c])[r]);
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<const std::vector<double>*>& columns) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::invalid_argument("csv: cannot write '" + path + "'");
  write_csv(out, header, columns);
}

}  // namespace empcosmo::io
