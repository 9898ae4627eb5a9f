#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace empcosmo::io {

// Floats print with 17 significant digits so CSV round-trips are lossless.
std::string format_g17(double v);

// A parsed CSV with a known header.  Columns are stored per name, in order.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  const std::vector<double>& col(const std::string& name) const;
};

// Reads a CSV whose header must match expected_header exactly (when given).
// Throws std::runtime_error on missing file, empty file, or malformed rows.
Table read_csv(const std::string& path,
               const std::vector<std::string>& expected_header = {});

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns);
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<const std::vector<double>*>& columns);

inline const std::vector<std::string> kTrajectoryHeader = {
    "t", "I1", "I2", "I3", "I4", "omega_sq", "lambda"};
inline const std::vector<std::string> kSolveHeader = {"t", "I2", "omega_sq"};
inline const std::vector<std::string> kSeriesHeader = {
    "tau", "t", "scale", "H", "rho_phi", "p_phi"};
inline const std::vector<std::string> kTrapTableHeader = {"t", "omega_sq"};

}  // namespace empcosmo::io
