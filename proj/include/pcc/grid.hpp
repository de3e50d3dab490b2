// grid.hpp - scan results on 1D/2D axes with ordered metadata, CSV/JSON IO
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace pcc {

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

// Row-major over (axis1, axis2); axis2 empty for 1D scans. Metadata keeps
// insertion order so serialized output is byte-stable.
struct SignalGrid {
  std::vector<std::pair<std::string, std::string>> metadata;
  GridAxis axis1, axis2;
  std::vector<double> values;

  bool two_d() const { return !axis2.values.empty(); }
  std::size_t rows() const { return axis1.values.size(); }
  std::size_t cols() const { return two_d() ? axis2.values.size() : 1; }
  double& at(std::size_t i1, std::size_t i2) { return values[i1 * cols() + i2]; }
  double at(std::size_t i1, std::size_t i2) const { return values[i1 * cols() + i2]; }
  void add_meta(const std::string& key, const std::string& value) {
    metadata.emplace_back(key, value);
  }
};

enum class GridFormat { Csv, Json };

// %.17g everywhere; NaN renders as "nan" (CSV) / null (JSON).
std::string grid_to_string(const SignalGrid& g, GridFormat fmt);
void write_grid(const SignalGrid& g, const std::string& path, GridFormat fmt);

// Format sniffed from content ('{' => JSON). Expects complete row-major grids
// as produced by write_grid.
SignalGrid read_grid(const std::string& path);
SignalGrid parse_grid(const std::string& text);

std::string format_double(double v);  // %.17g, NaN -> "nan"

}  // namespace pcc
