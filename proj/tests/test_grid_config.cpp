#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "pcc/grid.hpp"
#include "pcc/scan.hpp"
#include "pcc/signals.hpp"

using namespace pcc;

namespace {

std::string rec(std::initializer_list<const char*> lines) {
  std::string out;
  for (const char* l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string dump(const std::vector<Violation>& v) {
  std::string s;
  for (const auto& x : v)
    s += "  line " + std::to_string(x.line) + " [" + x.field + "] " + x.message +
         "\n";
  return s.empty() ? "  (none)\n" : s;
}

// at least one diagnostic landing on (line, field) whose message mentions msg
void expect(const std::string& text, int line, const std::string& field,
            const std::string& msg) {
  ScanSpec spec;
  auto v = parse_scan(text, spec);
  bool found = false;
  for (const auto& x : v)
    found = found || (x.line == line && x.field == field &&
                      x.message.find(msg) != std::string::npos);
  CHECK_MESSAGE(found, "wanted line ", line, " [", field, "] ~ \"", msg,
                "\", got:\n", dump(v));
}

std::string recipe_path(const char* name) {
  return std::string(RECIPE_DIR) + "/" + name;
}

std::pair<size_t, size_t> argmax_cell(const SignalGrid& g) {
  size_t bi = 0, bj = 0;
  double best = -1.0;
  for (size_t i = 0; i < g.rows(); ++i)
    for (size_t j = 0; j < g.cols(); ++j) {
      const double a = std::abs(g.at(i, j));
      if (!std::isnan(a) && a > best) {
        best = a;
        bi = i;
        bj = j;
      }
    }
  return {bi, bj};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PCC_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("snapshot-row spectrum recipe parses clean") {
  ScanSpec s;
  auto v = parse_scan_file(recipe_path("fig3a.scan"), s);
  REQUIRE_MESSAGE(v.empty(), dump(v));
  CHECK(s.version == 1);
  CHECK(s.signal == "s1");
  CHECK(s.gate1.shape == GateShape::Lorentzian);
  CHECK(s.gate1.sigma_t == 0.7);
  CHECK(s.gate1.sigma_w == 0.8);
  CHECK(s.g1_t_axis);
  CHECK(s.g1_w_axis);
  CHECK_FALSE(s.has_gate2);
  CHECK(s.model.omega0 == 12500.0);
  CHECK(s.model.k_down == 7.68);
  CHECK(s.model.gamma_f == 17.22);
  // snapshot list: five detection times, fs/ps suffixes normalized to ps
  REQUIRE(s.axis1.values == std::vector<double>{0.033, 0.33, 1.0, 3.3, 6.6});
  CHECK(s.axis1.var == "t");
  CHECK(s.axis1.count == 5);
  CHECK(s.axis1.min == 0.033);
  CHECK(s.axis1.max == 6.6);
  CHECK(s.axis2.var == "w");
  CHECK(s.axis2.values.empty());
  CHECK(s.axis2.count == 400);
  CHECK(s.axis2.min == 12300.0);
  CHECK(s.axis2.max == 12700.0);
}

TEST_CASE("coincidence recipe parses clean with trailing-detector offset") {
  ScanSpec s;
  auto v = parse_scan_file(recipe_path("fig4a.scan"), s);
  REQUIRE_MESSAGE(v.empty(), dump(v));
  CHECK(s.signal == "s2");
  CHECK(s.has_gate2);
  CHECK(s.t1_rel);
  CHECK(s.t1_offset_ps == doctest::Approx(0.0033).epsilon(1e-12));
  CHECK(s.gate2.center_t == 3.3);
  CHECK(s.axis1.var == "w1");
  CHECK(s.axis2.var == "w2");
  CHECK(s.axis1.count == 161);
  CHECK(s.axis2.count == 161);
  CHECK(s.g1_w_axis);
  CHECK(s.g2_w_axis);
  CHECK_FALSE(s.g1_t_axis);
}

TEST_CASE("every bundled recipe parses clean") {
  size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(RECIPE_DIR)) {
    if (e.path().extension() != ".scan") continue;
    ++n;
    ScanSpec s;
    auto v = parse_scan_file(e.path().string(), s);
    CHECK_MESSAGE(v.empty(), e.path().filename().string(), ":\n", dump(v));
  }
  CHECK(n == 28);
}

TEST_CASE("diagnostics identify line and field") {
  // header / kind problems
  expect(rec({"signal = s1"}), 0, "version", "version = 1 is required");
  expect(rec({"version = 2", "signal = s1"}), 1, "version",
         "unsupported recipe version");
  expect(rec({"version = 1", "signal = s3"}), 2, "signal",
         "expected one of s1, s2, g2, s1_oracle, s2_oracle");
  expect(rec({"version = 1", "bogus = 3"}), 2, "bogus",
         "unknown key outside any section");
  expect(rec({"version = 1", "signal = s1", "[model", "omega0 = 1"}), 3,
         "[model", "unterminated section header");
  expect(rec({"version = 1", "signal = s1", "just some words"}), 3,
         "just some words", "expected key = value");
  expect(rec({"version = 1", "signal = s1", "[axis3]", "var = w"}), 3, "axis3",
         "unknown section");
  expect(rec({"version = 1", "signal = s1", "[model]", "foo = 1"}), 4,
         "model.foo", "unknown model parameter");

  // axis problems
  expect(rec({"version = 1", "signal = s1"}), 0, "axis1",
         "[axis1] section is required");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "min = 1", "max = 2",
              "count = 3"}),
         3, "axis1.var", "axis variable is required");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w1", "min = 1",
              "max = 2", "count = 3"}),
         4, "axis1.var", "not a scan variable of signal s1");
  expect(rec({"version = 1", "signal = s2", "[axis1]", "var = t"}), 4,
         "axis1.var", "not a scan variable of signal s2");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = t", "min = 0.1",
              "max = 1ps", "count = 3"}),
         5, "axis1.min", "time values need a fs or ps suffix");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w", "min = 1",
              "max = 2", "count = 1"}),
         7, "axis1.count",
         "expected an integer >= 2 (use values = ... for snapshots)");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w", "min = 1",
              "max = 2", "count = 2.5"}),
         7, "axis1.count", "expected an integer >= 2");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w", "min = 2",
              "max = 2", "count = 3"}),
         3, "axis1", "needs max > min");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w", "min = 1",
              "max = 2"}),
         3, "axis1.count", "value is required");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w",
              "values = 1, 2", "count = 2"}),
         5, "axis1.values", "values excludes min/max/count");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w",
              "values = 2, 1"}),
         5, "axis1.values", "values must be strictly increasing");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w",
              "values = 1,,2"}),
         5, "axis1.values", "empty list entry");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w", "min = 1",
              "max = 2", "count = 2", "step = 1"}),
         8, "axis1.step", "unknown axis key");
  expect(rec({"version = 1", "signal = s1", "[axis1]", "var = w", "min = 1",
              "max = 2", "count = 2", "[axis2]", "var = w", "min = 3",
              "max = 4", "count = 2"}),
         9, "axis2.var", "axis1 and axis2 scan the same variable");

  // gate problems
  expect(rec({"version = 1", "signal = s1", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "center_t = axis", "center_w = axis", "[axis1]",
              "var = t", "min = 0.1ps", "max = 1ps", "count = 2", "[axis2]",
              "var = w", "min = 1", "max = 2", "count = 2"}),
         3, "gate1.sigma_w", "needs sigma_w > 0");
  expect(rec({"version = 1", "signal = s1_oracle", "[gate1]",
              "shape = physical_spectrum", "center_t = axis",
              "center_w = axis", "[axis1]", "var = t", "min = 0.1ps",
              "max = 1ps", "count = 2", "[axis2]", "var = w", "min = 1",
              "max = 2", "count = 2"}),
         3, "gate1.sigma_w", "physical-spectrum gates need a linewidth");
  expect(rec({"version = 1", "signal = s1", "[gate1]",
              "shape = physical_spectrum", "sigma_w = 8", "center_t = axis",
              "center_w = axis", "[axis1]", "var = t", "min = 0.1ps",
              "max = 1ps", "count = 2", "[axis2]", "var = w", "min = 1",
              "max = 2", "count = 2"}),
         4, "gate1.shape", "physical-spectrum gates run through the oracle");
  expect(rec({"version = 1", "signal = s1", "[gate1]", "shape = gaussian",
              "sigma_t = 7", "sigma_w = 8", "center_t = axis",
              "center_w = axis", "[axis1]", "var = t", "min = 0.1ps",
              "max = 1ps", "count = 2", "[axis2]", "var = w", "min = 1",
              "max = 2", "count = 2"}),
         4, "gate1.shape", "closed single-detector path covers lorentzian");
  expect(rec({"version = 1", "signal = s1", "[gate1]", "shape = square"}), 4,
         "gate1.shape", "expected gaussian, lorentzian, or physical_spectrum");
  expect(rec({"version = 1", "signal = s1", "[gate1]", "tilt = 3"}), 4,
         "gate1.tilt", "unknown gate key");
  expect(rec({"version = 1", "signal = s1", "[gate1]", "center_t = 0.5"}), 4,
         "gate1.center_t", "time values need a fs or ps suffix");
  expect(rec({"version = 1", "signal = s1", "[gate2]", "shape = lorentzian"}),
         0, "gate2", "single-detector signals use [gate1] only");
  expect(rec({"version = 1", "signal = s2", "[gate1]", "shape = lorentzian",
              "[axis1]", "var = w1", "min = 1", "max = 2", "count = 2"}),
         0, "gate2", "coincidence signals need a [gate2] section");

  // placeholder/axis agreement, both directions
  expect(rec({"version = 1", "signal = s1", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = axis",
              "center_w = axis", "[axis1]", "var = t", "min = 0.1ps",
              "max = 1ps", "count = 2"}),
         0, "gate1.center_w", "declared axis but no [axisN] var drives it");
  expect(rec({"version = 1", "signal = s1", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = axis",
              "center_w = 12500", "[axis1]", "var = t", "min = 0.1ps",
              "max = 1ps", "count = 2", "[axis2]", "var = w", "min = 1",
              "max = 2", "count = 2"}),
         0, "gate1.center_w", "driven by an axis variable; set it to axis");

  // detector-ordering rules
  expect(rec({"version = 1", "signal = s1", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = t2+1ps",
              "center_w = axis", "[axis1]", "var = w", "min = 1", "max = 2",
              "count = 2"}),
         0, "gate1.center_t", "needs a coincidence signal");
  {
    // the same geometry with a nonnegative offset is legal
    ScanSpec ok;
    auto v = parse_scan(
        rec({"version = 1", "signal = s2", "[gate1]", "shape = lorentzian",
             "sigma_t = 0.7", "sigma_w = 0.8", "center_t = t2+1ps",
             "center_w = axis", "[gate2]", "shape = lorentzian",
             "sigma_t = 0.7", "sigma_w = 0.8", "center_t = 1ps",
             "center_w = axis", "[axis1]", "var = w1", "min = 1", "max = 2",
             "count = 2", "[axis2]", "var = w2", "min = 1", "max = 2",
             "count = 2"}),
        ok);
    CHECK_MESSAGE(v.empty(), dump(v));
    CHECK(ok.t1_offset_ps == 1.0);
  }
  expect(rec({"version = 1", "signal = s2", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = t2+3q",
              "center_w = axis", "[gate2]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = 1ps",
              "center_w = axis", "[axis1]", "var = w1", "min = 1", "max = 2",
              "count = 2", "[axis2]", "var = w2", "min = 1", "max = 2",
              "count = 2"}),
         7, "gate1.center_t", "offset after t2+ needs a fs or ps suffix");
  expect(rec({"version = 1", "signal = s2", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = t2+-1ps",
              "center_w = axis", "[gate2]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = 1ps",
              "center_w = axis", "[axis1]", "var = w1", "min = 1", "max = 2",
              "count = 2", "[axis2]", "var = w2", "min = 1", "max = 2",
              "count = 2"}),
         0, "gate1.center_t", "must not fire before");
  expect(rec({"version = 1", "signal = s2", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = 1ps",
              "center_w = axis", "[gate2]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = 2ps",
              "center_w = axis", "[axis1]", "var = w1", "min = 1", "max = 2",
              "count = 2", "[axis2]", "var = w2", "min = 1", "max = 2",
              "count = 2"}),
         0, "gate1.center_t", "must not fire before");
  expect(rec({"version = 1", "signal = s2", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = t2+1ps",
              "center_w = axis", "[gate2]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = axis",
              "center_w = axis", "[axis1]", "var = w1", "min = 1", "max = 2",
              "count = 2", "[axis2]", "var = t1-t2", "min = 1ps", "max = 2ps",
              "count = 2"}),
         0, "gate1.center_t", "conflicts with an axis over t1-t2");

  // coincidence gate-shape rules
  expect(rec({"version = 1", "signal = s2", "[gate1]", "shape = gaussian",
              "sigma_t = 7", "sigma_w = 8", "center_t = t2+1ps",
              "center_w = axis", "[gate2]", "shape = gaussian", "sigma_t = 7",
              "sigma_w = 8", "center_t = 1ps", "center_w = axis", "[axis1]",
              "var = w1", "min = 1", "max = 2", "count = 2", "[axis2]",
              "var = w2", "min = 1", "max = 2", "count = 2"}),
         4, "gate1.shape", "closed coincidence path covers lorentzian");
  expect(rec({"version = 1", "signal = s2_oracle", "[gate1]",
              "shape = lorentzian", "sigma_t = 7", "sigma_w = 8",
              "center_t = t2+1ps", "center_w = axis", "[gate2]",
              "shape = physical_spectrum", "sigma_w = 8", "center_t = 1ps",
              "center_w = axis", "[axis1]", "var = w1", "min = 1", "max = 2",
              "count = 2", "[axis2]", "var = w2", "min = 1", "max = 2",
              "count = 2"}),
         10, "gate2.shape", "matching gate shapes");
  expect(rec({"version = 1", "signal = s2_oracle", "[gate1]",
              "shape = gaussian", "sigma_t = 7", "sigma_w = 8",
              "center_t = t2+1ps", "center_w = axis", "[gate2]",
              "shape = gaussian", "sigma_t = 7", "sigma_w = 8",
              "center_t = 1ps", "center_w = axis", "[axis1]", "var = w1",
              "min = 1", "max = 2", "count = 2", "[axis2]", "var = w2",
              "min = 1", "max = 2", "count = 2"}),
         4, "gate1.shape", "covers lorentzian and physical_spectrum pairs");

  // quadrature rules
  expect(rec({"version = 1", "signal = s1_oracle", "[gate1]",
              "shape = gaussian", "sigma_t = 7", "sigma_w = 8",
              "center_t = axis", "center_w = axis", "[axis1]", "var = t",
              "min = 0.1ps", "max = 1ps", "count = 2", "[axis2]", "var = w",
              "min = 1", "max = 2", "count = 2", "[quadrature]",
              "rule = trapezoid"}),
         0, "quadrature.rule", "trapezoid rule applies to lorentzian gates");
  expect(rec({"version = 1", "signal = s1_oracle", "[gate1]",
              "shape = lorentzian", "sigma_t = 7", "sigma_w = 8",
              "center_t = axis", "center_w = axis", "[axis1]", "var = t",
              "min = 0.1ps", "max = 1ps", "count = 2", "[axis2]", "var = w",
              "min = 1", "max = 2", "count = 2", "[quadrature]",
              "rule = simpson"}),
         20, "quadrature.rule", "expected gl or trapezoid");
  expect(rec({"version = 1", "signal = s1_oracle", "[gate1]",
              "shape = lorentzian", "sigma_t = 7", "sigma_w = 8",
              "center_t = axis", "center_w = axis", "[axis1]", "var = t",
              "min = 0.1ps", "max = 1ps", "count = 2", "[axis2]", "var = w",
              "min = 1", "max = 2", "count = 2", "[quadrature]",
              "envelope_span = 3"}),
         0, "quadrature.envelope_span", "must be >= 5");
  expect(rec({"version = 1", "signal = s1_oracle", "[gate1]",
              "shape = lorentzian", "sigma_t = 7", "sigma_w = 8",
              "center_t = axis", "center_w = axis", "[axis1]", "var = t",
              "min = 0.1ps", "max = 1ps", "count = 2", "[axis2]", "var = w",
              "min = 1", "max = 2", "count = 2", "[quadrature]",
              "target_rel_err = 0"}),
         0, "quadrature.target_rel_err", "must be > 0");
  expect(rec({"version = 1", "signal = s1_oracle", "[gate1]",
              "shape = lorentzian", "sigma_t = 7", "sigma_w = 8",
              "center_t = axis", "center_w = axis", "[axis1]", "var = t",
              "min = 0.1ps", "max = 1ps", "count = 2", "[axis2]", "var = w",
              "min = 1", "max = 2", "count = 2", "[quadrature]",
              "panels = 4"}),
         20, "quadrature.panels", "unknown quadrature key");
}

TEST_CASE("run_scan: grid values are the direct closed evaluations") {
  const std::string text =
      rec({"version = 1", "signal = s1", "scale = 2.5", "[model]",
           "gamma_e = 8.56", "gamma_f = 17.22", "[gate1]",
           "shape = lorentzian", "sigma_t = 0.7", "sigma_w = 0.8",
           "center_t = axis", "center_w = axis", "[axis1]", "var = t",
           "values = 0.1ps, 0.5ps, 2ps", "[axis2]", "var = w", "min = 12400",
           "max = 12600", "count = 4"});
  ScanSpec s;
  auto v = parse_scan(text, s);
  REQUIRE_MESSAGE(v.empty(), dump(v));
  SignalGrid g = run_scan(s);
  REQUIRE(g.rows() == 3);
  REQUIRE(g.cols() == 4);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 4; ++j) {
      GateConfig gc = s.gate1;
      const double t = g.axis1.values[i], w = g.axis2.values[j];
      CHECK(g.at(i, j) == s1_closed(t, w, gc, s.model, 2.5));
    }
  CHECK(g.axis1.name == "t");
  CHECK(g.axis2.values ==
        std::vector<double>{12400.0, 12400.0 + 200.0 / 3.0,
                            12400.0 + 400.0 / 3.0, 12600.0});
}

TEST_CASE("serialized grids round-trip and keep provenance") {
  const std::string text =
      rec({"version = 1", "signal = s1", "[model]", "gamma_e = 8.56",
           "gamma_f = 17.22", "[gate1]", "shape = lorentzian",
           "sigma_t = 0.7", "sigma_w = 0.8", "center_t = axis",
           "center_w = axis", "[axis1]", "var = t", "min = 100fs",
           "max = 1ps", "count = 2", "[axis2]", "var = w", "min = 12400",
           "max = 12600", "count = 2"});
  ScanSpec s;
  auto v = parse_scan(text, s);
  REQUIRE_MESSAGE(v.empty(), dump(v));
  SignalGrid g = run_scan(s);

  // 2x2 grid: metadata header, one column header, four data rows
  const std::string csv = grid_to_string(g, GridFormat::Csv);
  size_t meta = 0, data = 0;
  bool header = false;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0)
      ++meta;
    else if (line == "t,w,value")
      header = true;
    else
      ++data;
  }
  CHECK(meta == g.metadata.size());
  CHECK(header);
  CHECK(data == 4);

  auto meta_value = [&](const std::string& key) -> std::string {
    for (const auto& kv : g.metadata)
      if (kv.first == key) return kv.second;
    return "<missing>";
  };
  CHECK(meta_value("signal") == "s1");
  CHECK(meta_value("axis1_unit") == "ps");
  CHECK(meta_value("axis2_unit") == "cm^-1");
  CHECK(meta_value("axis1_spacing") == "uniform");
  CHECK(meta_value("gate1_center_t_ps") == "axis");
  // dephasing convention is recorded whenever the widths are active
  CHECK(meta_value("dephasing") ==
        "additive linewidth (multiplicative decay envelope)");
  ScanSpec s0;
  parse_scan(rec({"version = 1", "signal = s1", "[model]", "gamma_e = 0",
                  "gamma_f = 0", "[gate1]", "shape = lorentzian",
                  "sigma_t = 0.7", "sigma_w = 0.8", "center_t = axis",
                  "center_w = axis", "[axis1]", "var = t", "min = 100fs",
                  "max = 1ps", "count = 2", "[axis2]", "var = w",
                  "min = 12400", "max = 12600", "count = 2"}),
             s0);
  SignalGrid g0 = run_scan(s0);
  for (const auto& kv : g0.metadata) CHECK(kv.first != "dephasing");

  for (GridFormat fmt : {GridFormat::Csv, GridFormat::Json}) {
    const char* path = fmt == GridFormat::Csv ? "tmp_rt.csv" : "tmp_rt.json";
    write_grid(g, path, fmt);
    SignalGrid r = read_grid(path);
    CHECK(r.metadata == g.metadata);
    CHECK(r.axis1.name == g.axis1.name);
    CHECK(r.axis1.values == g.axis1.values);
    CHECK(r.axis2.values == g.axis2.values);
    REQUIRE(r.values.size() == g.values.size());
    for (size_t i = 0; i < g.values.size(); ++i) CHECK(r.values[i] == g.values[i]);
    std::remove(path);
  }

  bool threw = false;
  try {
    write_grid(g, "/nonexistent_dir/x.csv", GridFormat::Csv);
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("/nonexistent_dir/x.csv") !=
          std::string::npos);
  }
  CHECK(threw);
  CHECK_THROWS(parse_grid("   \n  "));
}

TEST_CASE("empty-upper-level coincidence masks the whole correlation grid") {
  auto g2_text = [&](const char* rho_ff, const char* scale) {
    return rec({"version = 1", "signal = g2", std::string("scale = " +
                std::string(scale)).c_str(), "[model]", "gamma_e = 8.56",
                "gamma_f = 17.22", "[gate1]", "shape = lorentzian",
                "sigma_t = 0.7", "sigma_w = 0.8", "center_t = t2+3.3fs",
                "center_w = axis", "[gate2]", "shape = lorentzian",
                "sigma_t = 0.75", "sigma_w = 0.85", "center_t = 3.3ps",
                "center_w = axis", "[axis1]", "var = w1",
                "values = 12375, 12625", "[axis2]", "var = w2",
                "values = 12620, 12880", "[model]",
                std::string("rho_ff0 = " + std::string(rho_ff)).c_str()});
  };
  ScanSpec s;
  auto v = parse_scan(g2_text("0", "1"), s);
  REQUIRE_MESSAGE(v.empty(), dump(v));
  SignalGrid g = run_scan(s);
  auto meta_value = [&](const SignalGrid& gr, const std::string& key) {
    for (const auto& kv : gr.metadata)
      if (kv.first == key) return kv.second;
    return std::string("<missing>");
  };
  for (double x : g.values) CHECK(std::isnan(x));
  CHECK(meta_value(g, "g2_masked_points") == "4");
  CHECK(meta_value(g, "g2_denominator") == "independent-detection product");
  const std::string csv = grid_to_string(g, GridFormat::Csv);
  CHECK(csv.find(",nan") != std::string::npos);
  const std::string js = grid_to_string(g, GridFormat::Json);
  CHECK(js.find("null") != std::string::npos);
  write_grid(g, "tmp_nan.json", GridFormat::Json);
  SignalGrid r = read_grid("tmp_nan.json");
  for (double x : r.values) CHECK(std::isnan(x));
  std::remove("tmp_nan.json");

  // the normalized ratio ignores the overall scale
  ScanSpec s1spec, s5spec;
  REQUIRE(parse_scan(g2_text("1", "1"), s1spec).empty());
  REQUIRE(parse_scan(g2_text("1", "5"), s5spec).empty());
  SignalGrid a = run_scan(s1spec), b = run_scan(s5spec);
  CHECK(meta_value(a, "g2_masked_points") == "0");
  for (size_t i = 0; i < a.values.size(); ++i) {
    CHECK(a.values[i] == b.values[i]);
    CHECK(std::isfinite(a.values[i]));
  }
}

TEST_CASE("grids are byte-stable across team sizes and repeat runs") {
  ScanSpec s;
  auto v = parse_scan_file(recipe_path("fig3a.scan"), s);
  REQUIRE_MESSAGE(v.empty(), dump(v));
  s.axis2.count = 60;  // keep the run short; spacing stays uniform
  const std::string one = grid_to_string(run_scan(s, 1), GridFormat::Csv);
  const std::string four = grid_to_string(run_scan(s, 4), GridFormat::Csv);
  const std::string again = grid_to_string(run_scan(s, 4), GridFormat::Csv);
  CHECK(one == four);
  CHECK(four == again);
  CHECK(one.find("# axis1_spacing=explicit\n") != std::string::npos);
  CHECK(one.find("# axis2_spacing=uniform\n") != std::string::npos);
}

TEST_CASE("coincidence maps peak on the relaxed diagonal cell") {
  // narrow gates, early window
  ScanSpec s;
  REQUIRE(parse_scan_file(recipe_path("fig4a.scan"), s).empty());
  s.axis1.count = 21;
  s.axis2.count = 21;
  SignalGrid g = run_scan(s);
  auto [i4, j4] = argmax_cell(g);
  const double w1s = g.axis1.values[i4], w2s = g.axis2.values[j4];
  const double step1 = (s.axis1.max - s.axis1.min) / 20.0;
  const double step2 = (s.axis2.max - s.axis2.min) / 20.0;
  CHECK(std::abs(w1s - 12375.0) <= step1 + 1e-9);
  CHECK(std::abs(w2s - 12620.0) <= step2 + 1e-9);
  // claimed upper-branch dominance at this window; the relaxed branch wins
  WARN(std::abs(w2s - 12880.0) <= step2 + 1e-9);

  // wide gates, late symmetric window: single relaxed-diagonal peak
  ScanSpec h;
  REQUIRE(parse_scan_file(recipe_path("fig5h.scan"), h).empty());
  h.axis1.count = 21;
  h.axis2.count = 21;
  SignalGrid gh = run_scan(h);
  auto [i5, j5] = argmax_cell(gh);
  CHECK(std::abs(gh.axis1.values[i5] - 12375.0) <=
        (h.axis1.max - h.axis1.min) / 20.0 + 1e-9);
  CHECK(std::abs(gh.axis2.values[j5] - 12620.0) <=
        (h.axis2.max - h.axis2.min) / 20.0 + 1e-9);
}

TEST_CASE("convergence failures name the offending grid point") {
  const std::string text =
      rec({"version = 1", "signal = s1_oracle", "[model]", "gamma_e = 8.56",
           "gamma_f = 17.22", "[gate1]", "shape = lorentzian",
           "sigma_t = 7", "sigma_w = 8", "center_t = 3.3ps",
           "center_w = axis", "[axis1]", "var = w", "values = 12375, 12625",
           "[quadrature]", "rule = trapezoid", "target_rel_err = 1e-7"});
  ScanSpec s;
  auto v = parse_scan(text, s);
  REQUIRE_MESSAGE(v.empty(), dump(v));
  bool threw = false;
  try {
    run_scan(s);
  } catch (const ConvergenceError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("grid point (w=12375") !=
          std::string::npos);
    CHECK(e.rel_change > 1e-7);
  }
  CHECK(threw);

  // the absolute floor waives the failure and counts the rescues
  s.quad.abs_floor = 1.0;
  SignalGrid g = run_scan(s);
  auto meta_value = [&](const std::string& key) {
    for (const auto& kv : g.metadata)
      if (kv.first == key) return kv.second;
    return std::string("<missing>");
  };
  CHECK(meta_value("quad_rule") == "trapezoid");
  CHECK(meta_value("conv_floor_rescues") == "2");
  CHECK(std::stod(meta_value("conv_max_rel")) > 1e-7);
  // rescued values still match the closed form to the honest step accuracy
  // (the fixed trapezoid step is sized for the large on-peak value, so the
  // weak 12625 point carries a larger relative error)
  GateConfig gc = s.gate1;
  for (size_t i = 0; i < 2; ++i)
    CHECK(std::abs(g.values[i] -
                   s1_closed(3.3, g.axis1.values[i], gc, s.model)) <=
          1e-3 * std::abs(g.values[i]));
}

TEST_CASE("cli: exit codes separate validation from numerics") {
  {
    std::ofstream f("tmp_ok.scan");
    f << rec({"version = 1", "signal = s1", "[model]", "gamma_e = 8.56",
              "gamma_f = 17.22", "[gate1]", "shape = lorentzian",
              "sigma_t = 0.7", "sigma_w = 0.8", "center_t = axis",
              "center_w = axis", "[axis1]", "var = t", "min = 0.1ps",
              "max = 1ps", "count = 2", "[axis2]", "var = w", "min = 12400",
              "max = 12600", "count = 2"});
  }
  {
    std::ofstream f("tmp_bad.scan");
    f << rec({"version = 1", "signal = s1", "[axis1]", "var = w", "min = 2",
              "max = 1", "count = 5"});
  }
  {
    std::ofstream f("tmp_conv.scan");
    f << rec({"version = 1", "signal = s1_oracle", "[model]",
              "gamma_e = 8.56", "gamma_f = 17.22", "[gate1]",
              "shape = lorentzian", "sigma_t = 7", "sigma_w = 8",
              "center_t = 3.3ps", "center_w = axis", "[axis1]", "var = w",
              "values = 12375, 12625", "[quadrature]", "rule = trapezoid",
              "target_rel_err = 1e-7"});
  }
  CHECK(run_cli("scan tmp_ok.scan --out tmp_ok_out.csv") == 0);
  SignalGrid g = read_grid("tmp_ok_out.csv");
  CHECK(g.values.size() == 4);
  CHECK(run_cli("scan tmp_ok.scan --format json --out tmp_ok_out.json") == 0);
  CHECK(read_grid("tmp_ok_out.json").values.size() == 4);
  CHECK(run_cli("scan tmp_bad.scan") == 2);
  CHECK(run_cli("scan tmp_missing_file.scan") == 2);
  CHECK(run_cli("scan tmp_conv.scan --out tmp_conv_out.csv") == 3);
  CHECK(run_cli("check") == 0);
  for (const char* p : {"tmp_ok.scan", "tmp_bad.scan", "tmp_conv.scan",
                        "tmp_ok_out.csv", "tmp_ok_out.json"})
    std::remove(p);
}
