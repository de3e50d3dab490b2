// pcc_cli.cpp - scan runner and self-check driver
//
// Exit codes: 0 success, 2 recipe validation failure, 3 numerical failure
// (convergence or unsupported regime).
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "pcc/gates.hpp"
#include "pcc/liouville.hpp"
#include "pcc/oracle.hpp"
#include "pcc/scan.hpp"
#include "pcc/signals.hpp"

namespace {

int cmd_scan(const std::string& recipe, std::string format, std::string out,
             int threads) {
  pcc::ScanSpec spec;
  auto viol = pcc::parse_scan_file(recipe, spec);
  if (!viol.empty()) {
    for (const auto& v : viol)
      std::fprintf(stderr, "%s:%d: %s: %s\n", recipe.c_str(), v.line,
                   v.field.c_str(), v.message.c_str());
    std::fprintf(stderr, "%zu problem(s); nothing was run\n", viol.size());
    return 2;
  }
  std::string path = !out.empty() ? out : spec.out;
  if (path.empty()) {
    auto slash = recipe.find_last_of('/');
    std::string stem = slash == std::string::npos ? recipe : recipe.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    path = stem + (format == "json" ? ".json" : ".csv");
  }
  if (format.empty())
    format = path.size() > 5 && path.substr(path.size() - 5) == ".json" ? "json"
                                                                        : "csv";
  try {
    pcc::SignalGrid g = pcc::run_scan(spec, threads);
    pcc::GridFormat fmt =
        format == "json" ? pcc::GridFormat::Json : pcc::GridFormat::Csv;
    if (path == "-") {
      std::fputs(pcc::grid_to_string(g, fmt).c_str(), stdout);
    } else {
      pcc::write_grid(g, path, fmt);
      std::fprintf(stderr, "wrote %s (%zu points)\n", path.c_str(),
                   g.values.size());
    }
    return 0;
  } catch (const pcc::ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

int cmd_check() {
  int failures = 0;
  auto report = [&](const char* name, bool ok, double worst) {
    std::printf("%-34s %s (worst %.3e)\n", name, ok ? "pass" : "FAIL", worst);
    if (!ok) ++failures;
  };

  {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 2.0);  // log10 sigma
    double worst = 1e300;
    for (int i = 0; i < 1000; ++i) {
      pcc::GateConfig g;
      g.shape = pcc::GateShape::Gaussian;
      g.sigma_t = std::pow(10.0, u(rng));
      g.sigma_w = std::pow(10.0, u(rng));
      auto bw = pcc::gaussian_bandwidths(g);
      worst = std::min(worst, bw.sigma_w_tilde / bw.sigma_t_tilde);
    }
    report("bandwidth product > 1", worst > 1.0, worst);
  }

  {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      pcc::TsjModel m;
      m.k_up = u01(rng) < 0.5 ? 0.0 : 5.0 * u01(rng);
      m.k_down = 0.5 + 15.0 * u01(rng);
      double t_ps = 5.0 * u01(rng);
      for (auto pair : {pcc::CoherencePair::eg, pcc::CoherencePair::ge,
                        pcc::CoherencePair::fe, pcc::CoherencePair::ef}) {
        pcc::SpinMatrix closed = pcc::coherence_propagator(pair, t_ps, m);
        pcc::SpinMatrix ref =
            pcc::sle_expm_oracle(pcc::to_block(pair), t_ps, m);
        worst = std::max(worst, pcc::max_abs_diff(closed, ref));
      }
    }
    report("propagators vs matrix exponential", worst < 1e-10, worst);
  }

  {
    pcc::TsjModel m;
    m.gamma_e = 8.56;
    m.gamma_f = 17.22;
    pcc::GateConfig g;
    g.shape = pcc::GateShape::Lorentzian;
    g.sigma_t = 7.0;
    g.sigma_w = 8.0;
    pcc::QuadratureSpec spec;
    double worst = 0.0;
    const double ts[5] = {0.033, 0.33, 1.0, 3.3, 6.6};
    const double ws[5] = {12375.0, 12625.0, 12500.0, 12320.0, 12680.0};
    bool ok = true;
    try {
      for (int i = 0; i < 5; ++i) {
        double closed = pcc::s1_closed(ts[i], ws[i], g, m);
        double oracle = pcc::integrate_s1(ts[i], ws[i], g, m, spec);
        double rel = std::abs(closed - oracle) /
                     std::max(std::abs(closed), 1e-300);
        worst = std::max(worst, rel);
      }
      ok = worst < 1e-4;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "  %s\n", e.what());
      ok = false;
    }
    report("closed signal vs quadrature", ok, worst);
  }

  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gated photon-counting spectrogram scans"};
  app.require_subcommand(1);

  std::string recipe, format, out;
  int threads = 0;
  auto* scan = app.add_subcommand("scan", "run a recipe and write the grid");
  scan->add_option("recipe", recipe, "recipe file")->required();
  scan->add_option("--format", format, "csv or json (default: from output name)")
      ->check(CLI::IsMember({"csv", "json"}));
  scan->add_option("--out", out, "output path ('-' for stdout)");
  scan->add_option("--threads", threads, "OpenMP team size (0 = runtime default)");

  auto* check = app.add_subcommand("check", "run quick numerical self-checks");

  CLI11_PARSE(app, argc, argv);
  if (scan->parsed()) return cmd_scan(recipe, format, out, threads);
  if (check->parsed()) return cmd_check();
  return 1;
}
