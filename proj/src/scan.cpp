// scan.cpp - recipe grammar and OpenMP grid sweeps
#include "pcc/scan.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pcc/signals.hpp"

namespace pcc {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0';
}

bool parse_int(const std::string& s, int& out) {
  double d;
  if (!parse_double(s, d)) return false;
  if (d != std::floor(d) || std::abs(d) > 1e9) return false;
  out = static_cast<int>(d);
  return true;
}

// times carry an explicit fs or ps suffix
bool parse_time_ps(const std::string& raw, double& out_ps) {
  std::string s = trim(raw);
  if (s.size() < 3) return false;
  std::string suf = lower(s.substr(s.size() - 2));
  if (suf != "ps" && suf != "fs") return false;
  double v;
  if (!parse_double(trim(s.substr(0, s.size() - 2)), v)) return false;
  out_ps = suf == "fs" ? v * 1e-3 : v;
  return true;
}

bool time_var(const std::string& var) {
  return var == "t" || var == "t2" || var == "t1-t2";
}

struct RawAxis {
  std::string min, max, count, var, values;
  int line_min = 0, line_max = 0, line_count = 0, line_var = 0, line_sect = 0;
  int line_values = 0;
  bool present = false;
};

struct RawGate {
  bool saw_t = false, saw_w = false;
  int line_t = 0, line_w = 0, line_sect = 0;
};

struct Parser {
  ScanSpec& spec;
  std::vector<Violation> v;
  RawAxis ax[2];
  RawGate gx[2];
  int version_line = 0, signal_line = 0;
  bool saw_version = false;
  int gate_shape_line[2] = {0, 0};

  explicit Parser(ScanSpec& s) : spec(s) {}

  void bad(int line, const std::string& field, const std::string& msg) {
    v.push_back({line, field, msg});
  }

  void top_key(int line, const std::string& key, const std::string& val) {
    if (key == "version") {
      saw_version = true;
      version_line = line;
      if (!parse_int(val, spec.version)) bad(line, "version", "expected an integer");
    } else if (key == "signal") {
      signal_line = line;
      spec.signal = lower(val);
    } else if (key == "scale") {
      if (!parse_double(val, spec.scale)) bad(line, "scale", "expected a number");
    } else if (key == "out") {
      spec.out = val;
    } else {
      bad(line, key, "unknown key outside any section");
    }
  }

  void model_key(int line, const std::string& key, const std::string& val) {
    static const std::map<std::string, double TsjModel::*> fields = {
        {"omega0", &TsjModel::omega0},     {"omega1", &TsjModel::omega1},
        {"delta0", &TsjModel::delta0},     {"delta1", &TsjModel::delta1},
        {"k_up", &TsjModel::k_up},         {"k_down", &TsjModel::k_down},
        {"gamma_e", &TsjModel::gamma_e},   {"gamma_f", &TsjModel::gamma_f},
        {"mu_eg", &TsjModel::mu_eg},       {"rho_ee0", &TsjModel::rho_ee0},
        {"rho_ff0", &TsjModel::rho_ff0}};
    auto it = fields.find(key);
    if (it == fields.end()) {
      bad(line, "model." + key, "unknown model parameter");
      return;
    }
    double d;
    if (!parse_double(val, d))
      bad(line, "model." + key, "expected a number (cm^-1 scale)");
    else
      spec.model.*(it->second) = d;
  }

  void gate_key(int line, int which, const std::string& key, const std::string& val) {
    GateConfig& g = which == 1 ? spec.gate1 : spec.gate2;
    std::string field = (which == 1 ? "gate1." : "gate2.") + key;
    if (key == "shape") {
      gate_shape_line[which - 1] = line;
      std::string s = lower(val);
      if (s == "gaussian")
        g.shape = GateShape::Gaussian;
      else if (s == "lorentzian")
        g.shape = GateShape::Lorentzian;
      else if (s == "physical_spectrum")
        g.shape = GateShape::PhysicalSpectrum;
      else
        bad(line, field, "expected gaussian, lorentzian, or physical_spectrum");
    } else if (key == "sigma_t" || key == "sigma_w") {
      RawGate& raw = gx[which - 1];
      (key == "sigma_t" ? raw.saw_t : raw.saw_w) = true;
      (key == "sigma_t" ? raw.line_t : raw.line_w) = line;
      double d;
      if (!parse_double(val, d))
        bad(line, field, "expected a width in cm^-1");
      else
        (key == "sigma_t" ? g.sigma_t : g.sigma_w) = d;
    } else if (key == "center_t") {
      if (lower(val) == "axis") {
        (which == 1 ? spec.g1_t_axis : spec.g2_t_axis) = true;
      } else if (which == 1 && lower(val).rfind("t2+", 0) == 0) {
        double off;
        if (!parse_time_ps(val.substr(3), off))
          bad(line, field, "offset after t2+ needs a fs or ps suffix");
        else {
          spec.t1_rel = true;
          spec.t1_offset_ps = off;
        }
      } else {
        double t;
        if (!parse_time_ps(val, t))
          bad(line, field, "time values need a fs or ps suffix");
        else
          g.center_t = t;
      }
    } else if (key == "center_w") {
      if (lower(val) == "axis") {
        (which == 1 ? spec.g1_w_axis : spec.g2_w_axis) = true;
      } else {
        double w;
        if (!parse_double(val, w))
          bad(line, field, "expected a frequency in cm^-1 or axis");
        else
          g.center_w = w;
      }
    } else {
      bad(line, field, "unknown gate key");
    }
  }

  void axis_key(int line, int which, const std::string& key, const std::string& val) {
    RawAxis& a = ax[which - 1];
    if (key == "var") {
      a.var = lower(val);
      a.line_var = line;
    } else if (key == "min") {
      a.min = val;
      a.line_min = line;
    } else if (key == "max") {
      a.max = val;
      a.line_max = line;
    } else if (key == "count") {
      a.count = val;
      a.line_count = line;
    } else if (key == "values") {
      a.values = val;
      a.line_values = line;
    } else {
      bad(line, (which == 1 ? "axis1." : "axis2.") + key, "unknown axis key");
    }
  }

  void quad_key(int line, const std::string& key, const std::string& val) {
    if (key == "rule") {
      std::string s = lower(val);
      if (s == "gl")
        spec.quad.rule = QuadRule::GaussLegendrePanels;
      else if (s == "trapezoid")
        spec.quad.rule = QuadRule::Trapezoid;
      else
        bad(line, "quadrature.rule", "expected gl or trapezoid");
      return;
    }
    double* slot = key == "target_rel_err"   ? &spec.quad.target_rel_err
                   : key == "refine"         ? &spec.quad.refine
                   : key == "envelope_span"  ? &spec.quad.envelope_span
                   : key == "abs_floor"      ? &spec.quad.abs_floor
                                             : nullptr;
    if (!slot) {
      bad(line, "quadrature." + key, "unknown quadrature key");
      return;
    }
    double d;
    if (!parse_double(val, d))
      bad(line, "quadrature." + key, "expected a number");
    else
      *slot = d;
  }

  void handle(int line, const std::string& sect, const std::string& key,
              const std::string& val) {
    if (sect.empty())
      top_key(line, key, val);
    else if (sect == "model")
      model_key(line, key, val);
    else if (sect == "gate1" || sect == "gate2")
      gate_key(line, sect == "gate1" ? 1 : 2, key, val);
    else if (sect == "axis1" || sect == "axis2")
      axis_key(line, sect == "axis1" ? 1 : 2, key, val);
    else if (sect == "quadrature")
      quad_key(line, key, val);
    // unknown sections are reported once at the header line
  }

  void resolve_axis(int which, bool pairkind) {
    RawAxis& a = ax[which - 1];
    AxisSpec& out = which == 1 ? spec.axis1 : spec.axis2;
    std::string name = which == 1 ? "axis1" : "axis2";
    if (!a.present) {
      if (which == 1) bad(0, "axis1", "[axis1] section is required");
      return;
    }
    if (a.var.empty()) {
      bad(a.line_sect, name + ".var", "axis variable is required");
      return;
    }
    out.var = a.var;
    static const std::set<std::string> pair_vars = {"w1", "w2", "t2", "t1-t2"};
    static const std::set<std::string> single_vars = {"t", "w"};
    const auto& allowed = pairkind ? pair_vars : single_vars;
    if (!allowed.count(a.var)) {
      bad(a.line_var, name + ".var",
          "not a scan variable of signal " + spec.signal);
      return;
    }
    bool tvar = time_var(a.var);
    auto parse_one = [&](const std::string& raw, int line, const std::string& fld,
                         double& slot) {
      if (tvar) {
        if (!parse_time_ps(raw, slot))
          bad(line, fld, "time values need a fs or ps suffix");
      } else if (!parse_double(raw, slot)) {
        bad(line, fld, "expected a frequency in cm^-1");
      }
    };
    if (!a.values.empty()) {
      // Explicit snapshot list; min/max/count are derived, not accepted.
      for (const auto* other : {&a.min, &a.max, &a.count})
        if (!other->empty())
          bad(a.line_values, name + ".values",
              "values excludes min/max/count");
      std::string item;
      std::istringstream iss(a.values);
      while (std::getline(iss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
          bad(a.line_values, name + ".values", "empty list entry");
          continue;
        }
        double d = 0.0;
        parse_one(item, a.line_values, name + ".values", d);
        out.values.push_back(d);
      }
      if (out.values.empty()) {
        bad(a.line_values, name + ".values", "needs at least one value");
        return;
      }
      for (size_t i = 1; i < out.values.size(); ++i)
        if (!(out.values[i] > out.values[i - 1])) {
          bad(a.line_values, name + ".values",
              "values must be strictly increasing");
          break;
        }
      out.min = out.values.front();
      out.max = out.values.back();
      out.count = static_cast<int>(out.values.size());
      return;
    }
    auto get = [&](const std::string& raw, int line, const std::string& fld,
                   double& slot) {
      if (raw.empty()) {
        bad(a.line_sect, fld, "value is required");
        return;
      }
      parse_one(raw, line, fld, slot);
    };
    get(a.min, a.line_min, name + ".min", out.min);
    get(a.max, a.line_max, name + ".max", out.max);
    if (a.count.empty())
      bad(a.line_sect, name + ".count", "value is required");
    else if (!parse_int(a.count, out.count) || out.count < 2)
      bad(a.line_count, name + ".count",
          "expected an integer >= 2 (use values = ... for snapshots)");
    if (!a.min.empty() && !a.max.empty() && !(out.max > out.min))
      bad(a.line_sect, name, "needs max > min");
  }

  void check_gate(int which, bool oracle) {
    const GateConfig& g = which == 1 ? spec.gate1 : spec.gate2;
    const RawGate& raw = gx[which - 1];
    std::string name = which == 1 ? "gate1" : "gate2";
    int line = gate_shape_line[which - 1];
    // missing widths report at the section header, bad values at their line
    if (g.shape == GateShape::PhysicalSpectrum) {
      if (!raw.saw_w || g.sigma_w <= 0.0)
        bad(raw.saw_w ? raw.line_w : raw.line_sect, name + ".sigma_w",
            "physical-spectrum gates need a linewidth sigma_w > 0");
      if (!oracle)
        bad(line, name + ".shape",
            "physical-spectrum gates run through the oracle kinds");
    } else {
      if (!raw.saw_t || g.sigma_t <= 0.0)
        bad(raw.saw_t ? raw.line_t : raw.line_sect, name + ".sigma_t",
            "needs sigma_t > 0");
      if (!raw.saw_w || g.sigma_w <= 0.0)
        bad(raw.saw_w ? raw.line_w : raw.line_sect, name + ".sigma_w",
            "needs sigma_w > 0");
    }
  }

  void finish() {
    if (!saw_version)
      bad(0, "version", "version = 1 is required");
    else if (spec.version != 1)
      bad(version_line, "version", "unsupported recipe version");
    static const std::set<std::string> kinds = {"s1", "s2", "g2", "s1_oracle",
                                                "s2_oracle"};
    bool kind_ok = kinds.count(spec.signal) > 0;
    if (spec.signal.empty())
      bad(0, "signal", "signal kind is required");
    else if (!kind_ok)
      bad(signal_line, "signal",
          "expected one of s1, s2, g2, s1_oracle, s2_oracle");
    if (!kind_ok) {
      // still surface axis syntax problems where possible
      if (ax[0].present) resolve_axis(1, true);
      return;
    }
    bool pairkind =
        spec.signal == "s2" || spec.signal == "g2" || spec.signal == "s2_oracle";
    bool oracle = spec.signal == "s1_oracle" || spec.signal == "s2_oracle";
    resolve_axis(1, pairkind);
    if (ax[1].present) resolve_axis(2, pairkind);
    spec.has_axis2 = ax[1].present;
    if (spec.has_axis2 && !spec.axis1.var.empty() &&
        spec.axis1.var == spec.axis2.var)
      bad(ax[1].line_var, "axis2.var", "axis1 and axis2 scan the same variable");
    if (pairkind && !spec.has_gate2)
      bad(0, "gate2", "coincidence signals need a [gate2] section");
    if (!pairkind && spec.has_gate2)
      bad(0, "gate2", "single-detector signals use [gate1] only");
    check_gate(1, oracle);
    if (pairkind && spec.has_gate2) check_gate(2, oracle);
    if (spec.signal == "s1" && spec.gate1.shape != GateShape::Lorentzian)
      bad(gate_shape_line[0], "gate1.shape",
          "the closed single-detector path covers lorentzian gates; use s1_oracle");
    if ((spec.signal == "s2" || spec.signal == "g2") &&
        (spec.gate1.shape != GateShape::Lorentzian ||
         spec.gate2.shape != GateShape::Lorentzian))
      bad(gate_shape_line[0], "gate1.shape",
          "the closed coincidence path covers lorentzian gate pairs");
    if (spec.signal == "s2_oracle") {
      if (spec.gate1.shape != spec.gate2.shape)
        bad(gate_shape_line[1], "gate2.shape",
            "coincidence oracle needs matching gate shapes");
      else if (spec.gate1.shape == GateShape::Gaussian)
        bad(gate_shape_line[0], "gate1.shape",
            "coincidence oracle covers lorentzian and physical_spectrum pairs");
    }
    if (spec.quad.rule == QuadRule::Trapezoid) {
      if (spec.signal == "s2_oracle")
        bad(0, "quadrature.rule", "coincidence oracle always uses gl panels");
      if (spec.signal == "s1_oracle" && spec.gate1.shape != GateShape::Lorentzian)
        bad(0, "quadrature.rule", "trapezoid rule applies to lorentzian gates");
    }
    // axis variables must land on fields declared as axis, and vice versa
    std::set<std::string> vars;
    if (!spec.axis1.var.empty()) vars.insert(spec.axis1.var);
    if (spec.has_axis2 && !spec.axis2.var.empty()) vars.insert(spec.axis2.var);
    struct Target {
      bool flag;
      std::vector<std::string> drivers;
      std::string field;
    };
    std::vector<Target> targets = {
        {spec.g1_t_axis, {"t", "t1-t2"}, "gate1.center_t"},
        {spec.g1_w_axis, {"w", "w1"}, "gate1.center_w"},
        {spec.g2_t_axis, {"t2"}, "gate2.center_t"},
        {spec.g2_w_axis, {"w2"}, "gate2.center_w"}};
    for (const auto& t : targets) {
      bool driven = false;
      for (const auto& d : t.drivers) driven = driven || vars.count(d) > 0;
      if (t.flag && !driven)
        bad(0, t.field, "declared axis but no [axisN] var drives it");
      if (!t.flag && driven)
        bad(0, t.field, "driven by an axis variable; set it to axis");
    }
    if (spec.t1_rel) {
      if (!pairkind)
        bad(0, "gate1.center_t", "the t2+offset form needs a coincidence signal");
      if (vars.count("t1-t2"))
        bad(0, "gate1.center_t",
            "t2+offset conflicts with an axis over t1-t2");
      if (spec.t1_offset_ps < 0.0)
        bad(0, "gate1.center_t", "detector 1 must not fire before detector 2");
    }
    if (pairkind && !spec.t1_rel && !spec.g1_t_axis && !spec.g2_t_axis &&
        !vars.count("t1-t2") && spec.gate1.center_t < spec.gate2.center_t)
      bad(0, "gate1.center_t", "detector 1 must not fire before detector 2");
    if (spec.quad.target_rel_err <= 0.0)
      bad(0, "quadrature.target_rel_err", "must be > 0");
    if (spec.quad.refine <= 0.0) bad(0, "quadrature.refine", "must be > 0");
    if (spec.quad.envelope_span < 5.0)
      bad(0, "quadrature.envelope_span", "must be >= 5 to bound truncation");
    if (spec.quad.abs_floor < 0.0) bad(0, "quadrature.abs_floor", "must be >= 0");
  }
};

void apply_var(const std::string& var, double val, GateConfig& g1, GateConfig& g2,
               double& off_ps, bool& use_off) {
  if (var == "t")
    g1.center_t = val;
  else if (var == "w" || var == "w1")
    g1.center_w = val;
  else if (var == "w2")
    g2.center_w = val;
  else if (var == "t2")
    g2.center_t = val;
  else if (var == "t1-t2") {
    off_ps = val;
    use_off = true;
  }
}

double eval_point(const ScanSpec& s, double a1, double a2, ConvergenceRecord* recs,
                  int& nrec) {
  GateConfig g1 = s.gate1, g2 = s.gate2;
  double off = s.t1_offset_ps;
  bool use_off = s.t1_rel;
  apply_var(s.axis1.var, a1, g1, g2, off, use_off);
  if (s.has_axis2) apply_var(s.axis2.var, a2, g1, g2, off, use_off);
  if (use_off) g1.center_t = g2.center_t + off;
  nrec = 0;
  if (s.signal == "s1")
    return s1_closed(g1.center_t, g1.center_w, g1, s.model, s.scale);
  if (s.signal == "s2") return s2_total({g1, g2}, s.model, s.scale);
  if (s.signal == "g2") return g2_normalized({g1, g2}, s.model);
  if (s.signal == "s1_oracle") {
    nrec = 1;
    return s.scale * integrate_s1(g1.center_t, g1.center_w, g1, s.model, s.quad,
                                  &recs[0]);
  }
  nrec = 2;
  complexd si = integrate_s2(S2Diagram::i, {g1, g2}, s.model, s.quad, &recs[0]);
  complexd sii = integrate_s2(S2Diagram::ii, {g1, g2}, s.model, s.quad, &recs[1]);
  return s.scale * 2.0 * (si + sii).real();
}

std::vector<double> linspace(const AxisSpec& a) {
  if (!a.values.empty()) return a.values;
  std::vector<double> v(static_cast<size_t>(a.count));
  if (a.count == 1) {
    v[0] = a.min;
    return v;
  }
  for (int i = 0; i < a.count; ++i)
    v[static_cast<size_t>(i)] =
        a.min + (a.max - a.min) * static_cast<double>(i) /
                    static_cast<double>(a.count - 1);
  return v;
}

std::string axis_unit(const std::string& var) {
  return time_var(var) ? "ps" : "cm^-1";
}

}  // namespace

std::vector<Violation> parse_scan(const std::string& text, ScanSpec& out) {
  out = ScanSpec{};
  Parser p(out);
  std::istringstream in(text);
  std::string raw, sect;
  int line = 0;
  static const std::set<std::string> sections = {"model", "gate1", "gate2",
                                                 "axis1", "axis2", "quadrature"};
  bool sect_known = true;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        p.bad(line, s, "unterminated section header");
        sect_known = false;
        continue;
      }
      sect = lower(trim(s.substr(1, s.size() - 2)));
      sect_known = sections.count(sect) > 0;
      if (!sect_known) p.bad(line, sect, "unknown section");
      if (sect == "gate1") p.gx[0].line_sect = line;
      if (sect == "gate2") {
        out.has_gate2 = true;
        p.gx[1].line_sect = line;
      }
      if (sect == "axis1") {
        p.ax[0].present = true;
        p.ax[0].line_sect = line;
      }
      if (sect == "axis2") {
        p.ax[1].present = true;
        p.ax[1].line_sect = line;
      }
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      p.bad(line, s, "expected key = value");
      continue;
    }
    if (!sect_known) continue;  // already reported at the header
    p.handle(line, sect, lower(trim(s.substr(0, eq))), trim(s.substr(eq + 1)));
  }
  p.finish();
  return p.v;
}

std::vector<Violation> parse_scan_file(const std::string& path, ScanSpec& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    out = ScanSpec{};
    return {{0, path, "cannot open recipe file"}};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scan(ss.str(), out);
}

SignalGrid run_scan(const ScanSpec& s, int threads) {
  SignalGrid g;
  g.axis1.name = s.axis1.var;
  g.axis1.values = linspace(s.axis1);
  if (s.has_axis2) {
    g.axis2.name = s.axis2.var;
    g.axis2.values = linspace(s.axis2);
  }
  const size_t n2 = s.has_axis2 ? g.axis2.values.size() : 1;
  const size_t n = g.axis1.values.size() * n2;
  g.values.assign(n, 0.0);
  bool oracle = s.signal == "s1_oracle" || s.signal == "s2_oracle";
  std::vector<double> rels(oracle ? n : 0, 0.0);
  std::vector<unsigned char> rescued(oracle ? n : 0, 0);
  std::vector<int> errkind(n, 0);
  std::vector<std::string> errs(n);
  std::vector<complexd> ecoarse(n), efine(n);
  std::vector<double> erel(n, 0.0);
  const long long total = static_cast<long long>(n);
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
  for (long long idx = 0; idx < total; ++idx) {
    const size_t i = static_cast<size_t>(idx);
    const size_t i1 = i / n2, i2 = i % n2;
    const double a1 = g.axis1.values[i1];
    const double a2 = s.has_axis2 ? g.axis2.values[i2] : 0.0;
    try {
      ConvergenceRecord recs[2];
      int nrec = 0;
      g.values[i] = eval_point(s, a1, a2, recs, nrec);
      for (int k = 0; k < nrec; ++k) {
        rels[i] = std::max(rels[i], recs[k].rel_change);
        if (recs[k].rel_change > s.quad.target_rel_err) rescued[i] = 1;
      }
    } catch (const ConvergenceError& e) {
      errkind[i] = 1;
      errs[i] = e.what();
      ecoarse[i] = e.coarse;
      efine[i] = e.fine;
      erel[i] = e.rel_change;
    } catch (const std::exception& e) {
      errkind[i] = 2;
      errs[i] = e.what();
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (!errkind[i]) continue;
    const size_t i1 = i / n2, i2 = i % n2;
    std::string ctx = "grid point (" + s.axis1.var + "=" +
                      format_double(g.axis1.values[i1]);
    if (s.has_axis2)
      ctx += ", " + s.axis2.var + "=" + format_double(g.axis2.values[i2]);
    ctx += "): " + errs[i];
    if (errkind[i] == 1) throw ConvergenceError(ctx, ecoarse[i], efine[i], erel[i]);
    throw std::runtime_error(ctx);
  }

  g.add_meta("format_version", "1");
  g.add_meta("signal", s.signal);
  g.add_meta("scale", format_double(s.scale));
  const TsjModel& m = s.model;
  g.add_meta("omega0", format_double(m.omega0));
  g.add_meta("omega1", format_double(m.omega1));
  g.add_meta("delta0", format_double(m.delta0));
  g.add_meta("delta1", format_double(m.delta1));
  g.add_meta("k_up", format_double(m.k_up));
  g.add_meta("k_down", format_double(m.k_down));
  g.add_meta("gamma_e", format_double(m.gamma_e));
  g.add_meta("gamma_f", format_double(m.gamma_f));
  g.add_meta("mu_eg", format_double(m.mu_eg));
  g.add_meta("rho_ee0", format_double(m.rho_ee0));
  g.add_meta("rho_ff0", format_double(m.rho_ff0));
  if (m.gamma_e != 0.0 || m.gamma_f != 0.0)
    g.add_meta("dephasing", "additive linewidth (multiplicative decay envelope)");
  auto shape_name = [](GateShape sh) {
    return sh == GateShape::Gaussian     ? "gaussian"
           : sh == GateShape::Lorentzian ? "lorentzian"
                                         : "physical_spectrum";
  };
  auto gate_meta = [&](const char* pre, const GateConfig& gc, bool t_axis,
                       bool w_axis, bool rel) {
    g.add_meta(std::string(pre) + "_shape", shape_name(gc.shape));
    g.add_meta(std::string(pre) + "_sigma_t", format_double(gc.sigma_t));
    g.add_meta(std::string(pre) + "_sigma_w", format_double(gc.sigma_w));
    g.add_meta(std::string(pre) + "_center_t_ps",
               rel      ? "t2+" + format_double(s.t1_offset_ps)
               : t_axis ? "axis"
                        : format_double(gc.center_t));
    g.add_meta(std::string(pre) + "_center_w",
               w_axis ? "axis" : format_double(gc.center_w));
  };
  gate_meta("gate1", s.gate1, s.g1_t_axis, s.g1_w_axis, s.t1_rel);
  if (s.has_gate2) gate_meta("gate2", s.gate2, s.g2_t_axis, s.g2_w_axis, false);
  auto axis_meta = [&](const char* pre, const AxisSpec& a) {
    g.add_meta(std::string(pre) + "_var", a.var);
    g.add_meta(std::string(pre) + "_unit", axis_unit(a.var));
    g.add_meta(std::string(pre) + "_min", format_double(a.min));
    g.add_meta(std::string(pre) + "_max", format_double(a.max));
    g.add_meta(std::string(pre) + "_count", std::to_string(a.count));
    g.add_meta(std::string(pre) + "_spacing",
               a.values.empty() ? "uniform" : "explicit");
  };
  axis_meta("axis1", s.axis1);
  if (s.has_axis2) axis_meta("axis2", s.axis2);
  if (oracle) {
    g.add_meta("quad_rule", s.quad.rule == QuadRule::Trapezoid ? "trapezoid" : "gl");
    g.add_meta("quad_target_rel_err", format_double(s.quad.target_rel_err));
    g.add_meta("quad_refine", format_double(s.quad.refine));
    g.add_meta("quad_envelope_span", format_double(s.quad.envelope_span));
    g.add_meta("quad_abs_floor", format_double(s.quad.abs_floor));
    double rmax = 0.0;
    long long nresc = 0;
    for (size_t i = 0; i < n; ++i) {
      rmax = std::max(rmax, rels[i]);
      nresc += rescued[i];
    }
    g.add_meta("conv_max_rel", format_double(rmax));
    g.add_meta("conv_floor_rescues", std::to_string(nresc));
  }
  if (s.signal == "g2") {
    long long masked = 0;
    for (double v : g.values) masked += std::isnan(v) ? 1 : 0;
    g.add_meta("g2_denominator", "independent-detection product");
    g.add_meta("g2_masked_points", std::to_string(masked));
  }
  double amax = 0.0;
  for (double v : g.values)
    if (!std::isnan(v)) amax = std::max(amax, std::abs(v));
  g.add_meta("abs_max", format_double(amax));
  return g;
}

}  // namespace pcc
