// bench.cpp - grid sweep timings, OpenMP team vs single thread
//
// Also byte-compares the two runs: scan output must not depend on the team
// size. Exit 1 on any mismatch.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>

#include "pcc/scan.hpp"

namespace {

double run_ms(const pcc::ScanSpec& spec, int threads, std::string& csv) {
  auto t0 = std::chrono::steady_clock::now();
  pcc::SignalGrid g = pcc::run_scan(spec, threads);
  auto t1 = std::chrono::steady_clock::now();
  csv = pcc::grid_to_string(g, pcc::GridFormat::Csv);
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

int bench_one(const char* name, const std::string& recipe) {
  pcc::ScanSpec spec;
  auto viol = pcc::parse_scan(recipe, spec);
  if (!viol.empty()) {
    std::fprintf(stderr, "%s: recipe is invalid\n", name);
    for (const auto& v : viol)
      std::fprintf(stderr, "  line %d: %s: %s\n", v.line, v.field.c_str(),
                   v.message.c_str());
    return 1;
  }
  std::string a, b;
  double serial = run_ms(spec, 1, a);
  double team = run_ms(spec, 0, b);
  bool same = a == b;
  std::printf("%-28s %4zu pts  serial %8.1f ms  team(%d) %8.1f ms  x%.2f  %s\n",
              name, spec.axis1.count * static_cast<size_t>(spec.axis2.count),
              serial, omp_get_max_threads(), team, serial / team,
              same ? "bytes equal" : "BYTES DIFFER");
  return same ? 0 : 1;
}

const char* kClosedS2 = R"(
version = 1
signal = s2

[model]
gamma_e = 8.56
gamma_f = 17.22

[gate1]
shape = lorentzian
sigma_t = 0.7
sigma_w = 0.8
center_t = t2+3.3fs
center_w = axis

[gate2]
shape = lorentzian
sigma_t = 0.75
sigma_w = 0.85
center_t = 3.3ps
center_w = axis

[axis1]
var = w1
min = 12275
max = 12725
count = 120

[axis2]
var = w2
min = 12520
max = 12980
count = 120
)";

const char* kOracleS1 = R"(
version = 1
signal = s1_oracle

[model]
gamma_e = 8.56
gamma_f = 17.22

[gate1]
shape = lorentzian
sigma_t = 7
sigma_w = 8
center_t = axis
center_w = axis

[axis1]
var = t
min = 0.033ps
max = 6.6ps
count = 6

[axis2]
var = w
min = 12300
max = 12700
count = 9
)";

const char* kOracleS2Ps = R"(
version = 1
signal = s2_oracle

[model]
gamma_e = 8.56
gamma_f = 17.22

[gate1]
shape = physical_spectrum
sigma_w = 0.8
center_t = 6.6ps
center_w = axis

[gate2]
shape = physical_spectrum
sigma_w = 0.85
center_t = 3.3ps
center_w = axis

[quadrature]
target_rel_err = 1e-3

[axis1]
var = w1
min = 12275
max = 12725
count = 6

[axis2]
var = w2
min = 12520
max = 12980
count = 6
)";

}  // namespace

int main() {
  std::printf("hardware threads: %d\n", omp_get_max_threads());
  int rc = 0;
  rc |= bench_one("coincidence map (closed)", kClosedS2);
  rc |= bench_one("single-detector (oracle)", kOracleS1);
  rc |= bench_one("coincidence map (oracle)", kOracleS2Ps);
  return rc;
}
