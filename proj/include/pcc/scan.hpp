// scan.hpp - recipe parsing and grid sweeps over detection coordinates
#pragma once

#include <string>
#include <vector>

#include "pcc/grid.hpp"
#include "pcc/model.hpp"
#include "pcc/oracle.hpp"

namespace pcc {

// Scan axis over one detection coordinate. var is one of:
//   t, w            (single-detector signals)
//   w1, w2, t2, t1-t2  (coincidence signals; t1-t2 offsets detector 1 from 2)
// Times are in ps, frequencies in cm^-1.
struct AxisSpec {
  std::string var;
  double min = 0.0, max = 0.0;
  int count = 0;
  // Explicit snapshot list (strictly increasing); replaces the uniform
  // min/max/count grid when non-empty (min/max/count are then derived).
  std::vector<double> values;
};

// Parsed recipe. signal is one of
//   s1, s2, g2          closed-form evaluators
//   s1_oracle, s2_oracle  quadrature evaluators (s2_oracle covers the
//                          physical-spectrum gate pairs)
struct ScanSpec {
  int version = 0;
  std::string signal;
  double scale = 1.0;
  std::string out;
  TsjModel model;
  GateConfig gate1, gate2;
  bool has_gate2 = false;
  // center fields declared as "axis" (filled per grid point)
  bool g1_t_axis = false, g1_w_axis = false, g2_t_axis = false, g2_w_axis = false;
  // gate1 center_t written as "t2+<time>" (detector 1 trails detector 2)
  bool t1_rel = false;
  double t1_offset_ps = 0.0;
  AxisSpec axis1, axis2;
  bool has_axis2 = false;
  QuadratureSpec quad;
};

struct Violation {
  int line;  // 0 for file-level problems
  std::string field;
  std::string message;
};

// Collects every problem (syntax and semantic) with line numbers; the spec is
// runnable iff the returned list is empty.
std::vector<Violation> parse_scan(const std::string& text, ScanSpec& out);
std::vector<Violation> parse_scan_file(const std::string& path, ScanSpec& out);

// Evaluates the grid. threads > 0 pins the OpenMP team size, 0 uses the
// runtime default; results are byte-identical either way (points are
// independent and each one is evaluated serially into its own slot).
SignalGrid run_scan(const ScanSpec& spec, int threads = 0);

}  // namespace pcc
