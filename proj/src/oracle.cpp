// oracle.cpp - panelised Gauss-Legendre quadrature of the gated signal integrals
//
// Every evaluation is serial and fixed-order; grid sweeps parallelize across
// points, never inside one, so results are bit-reproducible for any thread
// count. Every public entry point runs its quadrature twice (refine and
// 2*refine) and records the step-halving change.
#include "pcc/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <vector>

#include "pcc/gates.hpp"
#include "pcc/liouville.hpp"
#include "pcc/units.hpp"

namespace pcc {
namespace {

// 16-point Gauss-Legendre abscissae/weights on [-1, 1].
constexpr double kGlX[16] = {
    -9.89400934991649939e-01, -9.44575023073232600e-01, -8.65631202387831755e-01,
    -7.55404408355002999e-01, -6.17876244402643771e-01, -4.58016777657227370e-01,
    -2.81603550779258915e-01, -9.50125098376374544e-02, +9.50125098376374544e-02,
    +2.81603550779258915e-01, +4.58016777657227370e-01, +6.17876244402643771e-01,
    +7.55404408355002999e-01, +8.65631202387831755e-01, +9.44575023073232600e-01,
    +9.89400934991649939e-01};
constexpr double kGlW[16] = {
    +2.71524594117540374e-02, +6.22535239386477063e-02, +9.51585116824925914e-02,
    +1.24628971255534030e-01, +1.49595988816576764e-01, +1.69156519395002619e-01,
    +1.82603415044923612e-01, +1.89450610455068585e-01, +1.89450610455068585e-01,
    +1.82603415044923612e-01, +1.69156519395002619e-01, +1.49595988816576764e-01,
    +1.24628971255534030e-01, +9.51585116824925914e-02, +6.22535239386477063e-02,
    +2.71524594117540374e-02};

struct Grid {
  std::vector<double> x, w;
  size_t size() const { return x.size(); }
};

// Panel budget: each 16-point panel covers ~4 units of (oscillation + decay)
// phase. The cap guards degenerate parameter sets (near-zero widths).
int panel_count(double L, double lam, double refine) {
  double n = std::ceil(L * lam / 4.0 * refine) + 1.0;
  if (!(n > 0.0)) n = 1.0;
  if (n > 50000.0)
    throw UnsupportedRegime(
        "quadrature axis needs >50000 panels; widths/detunings outside the "
        "supported range");
  return static_cast<int>(n);
}

void append_gl_panels(Grid& g, double a, double b, int npan) {
  npan = std::max(1, npan);
  double h = (b - a) / npan;
  g.x.reserve(g.x.size() + 16 * npan);
  g.w.reserve(g.w.size() + 16 * npan);
  for (int p = 0; p < npan; ++p) {
    double c = a + (p + 0.5) * h, hh = 0.5 * h;
    for (int i = 0; i < 16; ++i) {
      g.x.push_back(c + hh * kGlX[i]);
      g.w.push_back(hh * kGlW[i]);
    }
  }
}

Grid gl_panels(double a, double b, int npan) {
  Grid g;
  append_gl_panels(g, a, b, npan);
  return g;
}

// [0, L] (or [0, span/decay] when L <= 0), density (osc + decay)/4 per panel.
Grid axis_grid(double L, double osc, double decay, double refine, double span) {
  if (L <= 0.0) L = span / std::max(decay, 1e-30);
  return gl_panels(0.0, L, panel_count(L, osc + decay, refine));
}

Grid trapezoid_grid(double L, double step) {
  double n = std::ceil(L / std::max(step, 1e-300)) + 1.0;
  if (n > 5.0e6)
    throw UnsupportedRegime("trapezoid grid needs >5e6 nodes; loosen the step rule");
  int nn = std::max(2, static_cast<int>(n));
  Grid g;
  g.x.reserve(nn);
  g.w.reserve(nn);
  double h = L / (nn - 1);
  for (int i = 0; i < nn; ++i) {
    g.x.push_back(i * h);
    g.w.push_back(i == 0 || i == nn - 1 ? 0.5 * h : h);
  }
  return g;
}

double eg_osc(double w, const TsjModel& m) {
  auto f = derived_frequencies(m);
  return std::max(std::abs(w - f.w_eg_plus), std::abs(w - f.w_eg_minus));
}

double fe_osc(double w, const TsjModel& m) {
  auto f = derived_frequencies(m);
  return std::max(std::abs(w - f.w_fe_plus), std::abs(w - f.w_fe_minus));
}

// (1,1) . G_pair(t) with the block's dephasing envelope; t in natural units.
SpinVector coherence_colsums(CoherencePair pair, double gamma, double t_nat,
                             const TsjModel& m) {
  SpinMatrix G = coherence_propagator(pair, to_ps(t_nat), m);
  double env = std::exp(-gamma * t_nat);
  SpinVector cs;
  cs[0] = (G(0, 0) + G(1, 0)) * env;
  cs[1] = (G(0, 1) + G(1, 1)) * env;
  return cs;
}

// G_pop(t) . (1,0)^T: bath distribution after evolving the spin-up start.
SpinVector population_from_u(double t_nat, const TsjModel& m) {
  SpinMatrix G = population_propagator(to_ps(t_nat), m);
  SpinVector v;
  v[0] = G(0, 0);
  v[1] = G(1, 0);
  return v;
}

template <typename F>
complexd richardson(F&& eval, const QuadratureSpec& spec, ConvergenceRecord* rec,
                    const char* what) {
  double r = std::max(spec.refine, 1e-3);
  complexd coarse = eval(r);
  complexd fine = eval(2.0 * r);
  double diff = std::abs(coarse - fine);
  double rel = diff / std::max(std::abs(fine), 1e-300);
  if (rec) *rec = {coarse, fine, rel};
  if (rel > spec.target_rel_err && diff > spec.abs_floor) {
    char msg[192];
    std::snprintf(msg, sizeof msg,
                  "%s: step-halving change %.3e exceeds target %.3e (|coarse|=%.3e)",
                  what, rel, spec.target_rel_err, std::abs(coarse));
    throw ConvergenceError(msg, coarse, fine, rel);
  }
  return fine;
}

// ------------------------------------------------------------------ S1 paths

// Detector-1 tau covector: int dtau e^{-(i w1 + sT1 + sw1) tau} (1,1) G_ge(tau).
SpinVector tau1_covector(double w1, double sT1, double sw1, const TsjModel& m,
                         double refine, double span) {
  double decay = sT1 + sw1 + m.gamma_e;
  double K = m.k_up + m.k_down;
  double L = span / decay;
  Grid g = gl_panels(0.0, L, panel_count(L, eg_osc(w1, m) + decay + K, refine));
  SpinVector W;
  for (size_t i = 0; i < g.size(); ++i) {
    SpinVector cs = coherence_colsums(CoherencePair::ge, m.gamma_e, g.x[i], m);
    complexd ker = g.w[i] * std::exp(-complexd(sT1 + sw1, w1) * g.x[i]);
    W[0] += ker * cs[0];
    W[1] += ker * cs[1];
  }
  return W;
}

// Lorentzian gate: forward t' >= max(t, 0); the tau and t' integrals factor
// through the 2-component bath space (covector x vector contraction).
complexd s1_lor_eval(double t, double w, const GateConfig& g, const TsjModel& m,
                     const QuadratureSpec& spec, double refine) {
  double sT = g.sigma_t, sw = g.sigma_w;
  double t0 = std::max(0.0, t);
  double osc = eg_osc(w, m);
  double K = m.k_up + m.k_down;
  double tau_decay = sT + sw + m.gamma_e;
  Grid xg, tg;
  if (spec.rule == QuadRule::Trapezoid) {
    double sig_max = std::max(2.0 * sT, tau_decay);
    double step =
        std::min(1.0 / (10.0 * std::max(osc, 1e-12)), 1.0 / (10.0 * sig_max)) / refine;
    xg = trapezoid_grid(spec.envelope_span / (2.0 * sT), step);
    tg = trapezoid_grid(spec.envelope_span / tau_decay, step);
  } else {
    xg = axis_grid(0.0, K, 2.0 * sT, refine, spec.envelope_span);
    tg = axis_grid(0.0, osc + K, tau_decay, refine, spec.envelope_span);
  }
  SpinVector W;
  for (size_t i = 0; i < tg.size(); ++i) {
    SpinVector cs = coherence_colsums(CoherencePair::ge, m.gamma_e, tg.x[i], m);
    complexd ker = tg.w[i] * std::exp(-complexd(sT + sw, w) * tg.x[i]);
    W[0] += ker * cs[0];
    W[1] += ker * cs[1];
  }
  SpinVector V;
  for (size_t i = 0; i < xg.size(); ++i) {
    SpinVector v = population_from_u(t0 + xg.x[i], m);
    double ker = xg.w[i] * std::exp(-2.0 * sT * (t0 + xg.x[i] - t));
    V[0] += ker * v[0];
    V[1] += ker * v[1];
  }
  complexd I = (W[0] * V[0] + W[1] * V[1]) / (2.0 * sw);
  return -2.0 * I.real() * m.mu_eg * m.mu_eg * m.rho_ee0;
}

// Gaussian gate: two-sided t' window clipped at preparation; the sT^2*(t'-t)
// cross term couples the axes, so the tensor product is evaluated directly.
complexd s1_gauss_eval(double t_ps, double w, const GateConfig& g, const TsjModel& m,
                       double refine, double span) {
  double sT = g.sigma_t;
  double t = to_natural_time(t_ps);
  GateConfig gg = g;
  gg.center_t = t_ps;
  gg.center_w = w;
  double Lg = std::sqrt(span + 2.0) / sT;
  double lo = std::max(0.0, t - Lg), hi = t + Lg;
  if (hi <= lo) return 0.0;
  double swt = gaussian_bandwidths(g).sigma_w_tilde;
  double drift = sT * sT * Lg;  // largest tau-chirp rate over the window
  double Lt = (drift + std::sqrt(drift * drift + 2.0 * span * swt * swt)) / (swt * swt);
  double K = m.k_up + m.k_down;
  Grid xg = gl_panels(lo, hi, panel_count(hi - lo, 10.0 * sT + K + m.k_down, refine));
  Grid tg = gl_panels(0.0, Lt,
                      panel_count(Lt, eg_osc(w, m) + swt + drift + m.gamma_e + K, refine));
  std::vector<SpinVector> cs(tg.size());
  for (size_t i = 0; i < tg.size(); ++i)
    cs[i] = coherence_colsums(CoherencePair::ge, m.gamma_e, tg.x[i], m);
  complexd acc = 0.0;
  for (size_t ix = 0; ix < xg.size(); ++ix) {
    SpinVector v = population_from_u(xg.x[ix], m);
    double tp_ps = to_ps(xg.x[ix]);
    complexd inner = 0.0;
    for (size_t it = 0; it < tg.size(); ++it) {
      complexd D = gaussian_spectrogram(gg, tp_ps, to_ps(tg.x[it]));
      inner += tg.w[it] * D * (cs[it][0] * v[0] + cs[it][1] * v[1]);
    }
    acc += xg.w[ix] * inner;
  }
  return -2.0 * acc.real() * m.mu_eg * m.mu_eg * m.rho_ee0;
}

// Physical-spectrum gate: backward x = t - t' in [0, t], tau in [0, x];
// resonant carrier e^{-i w tau}, filter memory e^{-Gamma x + Gamma tau / 2}.
complexd s1_ps_eval(double t, double w, const GateConfig& g, const TsjModel& m,
                    double refine, double span) {
  double Gam = g.sigma_w;
  if (t <= 0.0) return 0.0;
  double osc = eg_osc(w, m);
  double K = m.k_up + m.k_down;
  // net x-envelope is e^{-Gamma x / 2} after the worst-case tau growth
  double Lx = std::min(t, 2.0 * span / Gam);
  Grid xg = gl_panels(0.0, Lx, panel_count(Lx, Gam + K, refine));
  complexd acc = 0.0;
  for (size_t ix = 0; ix < xg.size(); ++ix) {
    double x = xg.x[ix];
    Grid tg = gl_panels(0.0, x, panel_count(x, osc + m.gamma_e + K + Gam, refine));
    SpinVector v = population_from_u(t - x, m);
    complexd inner = 0.0;
    for (size_t it = 0; it < tg.size(); ++it) {
      SpinVector cs = coherence_colsums(CoherencePair::ge, m.gamma_e, tg.x[it], m);
      complexd ker = tg.w[it] * std::exp(complexd(0.5 * Gam, -w) * tg.x[it]);
      inner += ker * (cs[0] * v[0] + cs[1] * v[1]);
    }
    acc += xg.w[ix] * std::exp(-Gam * x) * inner;
  }
  return -2.0 * acc.real() * m.mu_eg * m.mu_eg * m.rho_ee0;
}

// ------------------------------------------------------------------ S2 paths

// Covector W.L (population generator acting to the left).
SpinVector left_apply(const SpinVector& W, const SpinMatrix& L) {
  SpinVector r;
  r[0] = W[0] * L(0, 0) + W[1] * L(1, 0);
  r[1] = W[0] * L(0, 1) + W[1] * L(1, 1);
  return r;
}

// Exact xi-integral of e^{-wg xi} W . G_pop(s0 + xi) . y over xi >= 0, using
// G_pop(s) = 1 + (1 - e^{-K s}) L / K (reduces to the e^{-k s} split at k_up=0).
struct SLeg {
  SpinVector W, WL;
  double R0, RK, K;
  SLeg(const SpinVector& w, const TsjModel& m, double wg)
      : W(w), K(m.k_up + m.k_down) {
    WL = left_apply(w, population_generator(m));
    R0 = 1.0 / wg;
    RK = 1.0 / (wg + K);
  }
  complexd operator()(double s0, const SpinVector& y) const {
    complexd Wy = W[0] * y[0] + W[1] * y[1];
    if (K <= 0.0) return R0 * Wy;
    complexd WLy = WL[0] * y[0] + WL[1] * y[1];
    return R0 * Wy + WLy / K * (R0 - std::exp(-K * s0) * RK);
  }
};

// Diagram i, Lorentzian pair: population to t2', fe coherence over tau2 >= 0,
// population gap s to t1', with detector-1's time gate opening at lag T.
complexd s2i_lor_eval(const DetectorPair& p, const TsjModel& m, double refine,
                      double span) {
  double sT1 = p.det1.sigma_t, sw1 = p.det1.sigma_w;
  double sT2 = p.det2.sigma_t, sw2 = p.det2.sigma_w;
  double w1 = p.det1.center_w, w2 = p.det2.center_w;
  double T = to_natural_time(p.det1.center_t - p.det2.center_t);
  double t2n = to_natural_time(p.det2.center_t);
  double K = m.k_up + m.k_down;
  double wg = 2.0 * sT1;
  SLeg sleg(tau1_covector(w1, sT1, sw1, m, refine, span), m, wg);
  double osc2 = fe_osc(w2, m);
  Grid tg = axis_grid(0.0, osc2 + K, sT2 + sw2 + m.gamma_f, refine, span);
  Grid xg = axis_grid(0.0, K, 2.0 * sT2, refine, span);
  std::vector<SpinMatrix> Gef(tg.size());
  std::vector<complexd> ker2(tg.size());
  for (size_t i = 0; i < tg.size(); ++i) {
    Gef[i] = std::exp(-m.gamma_f * tg.x[i]) *
             coherence_propagator(CoherencePair::ef, to_ps(tg.x[i]), m);
    ker2[i] = tg.w[i] * std::exp(-complexd(sT2 + sw2, w2) * tg.x[i]);
  }
  complexd val = 0.0;
  for (size_t ix = 0; ix < xg.size(); ++ix) {
    double x = xg.x[ix];
    SpinVector v = population_from_u(t2n + x, m);
    double kerx = xg.w[ix] * std::exp(-2.0 * sT2 * x);
    complexd acc = 0.0;
    for (size_t it = 0; it < tg.size(); ++it) {
      SpinVector y = Gef[it] * v;
      double s0 = std::max(0.0, T - tg.x[it] - x);
      double gate_s = std::exp(-wg * (s0 + tg.x[it] + x - T));
      acc += ker2[it] * gate_s * sleg(s0, y);
    }
    val += kerx * acc;
  }
  double pref = m.mu_eg * m.mu_eg * m.mu_fe() * m.mu_fe() * m.rho_ff0 /
                (4.0 * sw1 * sw2);
  return pref * val;
}

// Diagram ii, Lorentzian pair: detector 2's negative-tau branch runs over
// m = -tau2 in [0, x]; the m-integrand can grow like e^{(sT2-sw2-gf+K) m}
// (bounded by the outer e^{-2 sT2 x}), so the x-grid is split into a fine
// region where the m-integral still sweeps and a coarse tail, with panel
// edges aligned at the s0 kink (x = T) and the boundary-term cutoff.
complexd s2ii_lor_eval(const DetectorPair& p, const TsjModel& m, double refine,
                       double span) {
  double sT1 = p.det1.sigma_t, sw1 = p.det1.sigma_w;
  double sT2 = p.det2.sigma_t, sw2 = p.det2.sigma_w;
  double w1 = p.det1.center_w, w2 = p.det2.center_w;
  double T = to_natural_time(p.det1.center_t - p.det2.center_t);
  double t2n = to_natural_time(p.det2.center_t);
  double K = m.k_up + m.k_down;
  double wg = 2.0 * sT1;
  SLeg sleg(tau1_covector(w1, sT1, sw1, m, refine, span), m, wg);
  double osc2 = fe_osc(w2, m);
  double lam_m = osc2 + sT2 + sw2 + m.gamma_f + K;
  double rt = m.gamma_f + sw2 - sT2 - K;  // m-envelope decay incl. e^{+K m} growth
  double mcut = rt > 0.5 ? span / rt : 1e300;
  double rx = m.gamma_f + sw2 - sT2;  // m = x boundary-term decay
  double Lx = span / (2.0 * sT2);
  double xc = rx > 0.5 ? std::min(span / rx, Lx) : Lx;
  std::vector<double> edges = {0.0, Lx};
  if (0.0 < xc && xc < Lx) edges.push_back(xc);
  if (0.0 < T && T < Lx) edges.push_back(T);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Grid xg;
  for (size_t e = 0; e + 1 < edges.size(); ++e) {
    double lam = edges[e] < xc ? lam_m + 2.0 * sT2 : 2.0 * sT2 + K;
    append_gl_panels(xg, edges[e], edges[e + 1],
                     panel_count(edges[e + 1] - edges[e], lam, refine));
  }
  complexd val = 0.0;
  for (size_t ix = 0; ix < xg.size(); ++ix) {
    double x = xg.x[ix];
    double mtop = std::min(x, mcut);
    Grid mg = gl_panels(0.0, mtop, panel_count(mtop, lam_m, refine));
    double s0 = std::max(0.0, T - x);
    double gate_s = std::exp(-wg * (s0 + x - T));
    complexd acc = 0.0;
    for (size_t im = 0; im < mg.size(); ++im) {
      double mm = mg.x[im];
      SpinVector v = population_from_u(t2n + x - mm, m);
      SpinMatrix Gfe = std::exp(-m.gamma_f * mm) *
                       coherence_propagator(CoherencePair::fe, to_ps(mm), m);
      SpinVector y = Gfe * v;
      complexd km = mg.w[im] * std::exp(complexd(sT2 - sw2, w2) * mm);
      acc += km * gate_s * sleg(s0, y);
    }
    val += xg.w[ix] * std::exp(-2.0 * sT2 * x) * acc;
  }
  double pref = m.mu_eg * m.mu_eg * m.mu_fe() * m.mu_fe() * m.rho_ff0 /
                (4.0 * sw1 * sw2);
  return pref * val;
}

// Physical-spectrum S2: detector 1's tau1 and s integrals are contracted into
// cumulative tables on a dense tau grid,
//   J_j(u)  = int_0^u e^{(-i w1 + Gam1/2) tau} [(1,1) G_ge(tau)]_j dtau,
//   K0_j(L) = int_0^L e^{-Gam1 s} J_j(s) ds,
//   K1_j(L) = int_0^L e^{(K - Gam1) s} J_j(s) ds,
// so the s-quadrature collapses to two table lookups per inner node:
//   int_0^smax ds e^{-Gam1 (smax-s)} J(smax-s) . G_pop(s) y
//     = K0(smax) . w0 + e^{-K smax} K1(smax) . w1,
//   w0 = y + L y / K, w1 = -L y / K   (w0 = y, w1 = 0 at K = 0).
struct PsTables {
  double h = 0.0;
  std::vector<complexd> K0[2], K1[2];
  double K = 0.0;
  SpinMatrix L;

  complexd look(const std::vector<complexd>& a, double u) const {
    double r = std::max(u, 0.0) / h;
    size_t i = std::min(static_cast<size_t>(r), a.size() - 2);
    double f = r - static_cast<double>(i);
    if (f > 1.0) f = 1.0;
    return a[i] + f * (a[i + 1] - a[i]);
  }
  complexd inner(double smax, const SpinVector& y) const {
    SpinVector w0 = y, w1;
    if (K > 0.0) {
      SpinVector Ly = L * y;
      w0[0] += Ly[0] / K;
      w0[1] += Ly[1] / K;
      w1[0] = -Ly[0] / K;
      w1[1] = -Ly[1] / K;
    }
    complexd r = look(K0[0], smax) * w0[0] + look(K0[1], smax) * w0[1];
    if (K > 0.0)
      r += std::exp(-K * smax) *
           (look(K1[0], smax) * w1[0] + look(K1[1], smax) * w1[1]);
    return r;
  }
};

PsTables build_ps_tables(double w1, double Gam1, double umax, const TsjModel& m,
                         double h) {
  PsTables t;
  t.h = h;
  t.K = m.k_up + m.k_down;
  t.L = population_generator(m);
  if ((0.5 * Gam1 - m.gamma_e) * umax > 600.0 || (t.K - Gam1) * umax > 600.0)
    throw UnsupportedRegime("physical-spectrum tables overflow: Gamma, rates, and "
                            "detection times out of the supported range");
  size_t n = static_cast<size_t>(umax / h) + 2;
  std::vector<complexd> J[2];
  for (int j = 0; j < 2; ++j) {
    J[j].assign(n, 0.0);
    t.K0[j].assign(n, 0.0);
    t.K1[j].assign(n, 0.0);
  }
  complexd f_prev[2];
  {
    SpinVector cs = coherence_colsums(CoherencePair::ge, m.gamma_e, 0.0, m);
    f_prev[0] = cs[0];
    f_prev[1] = cs[1];
  }
  complexd g0_prev[2] = {0.0, 0.0}, g1_prev[2] = {0.0, 0.0};
  for (size_t i = 1; i < n; ++i) {
    double tau = static_cast<double>(i) * h;
    SpinVector cs = coherence_colsums(CoherencePair::ge, m.gamma_e, tau, m);
    complexd ph = std::exp(complexd(0.5 * Gam1, -w1) * tau);
    double e0 = std::exp(-Gam1 * tau);
    double e1 = std::exp((t.K - Gam1) * tau);
    for (int j = 0; j < 2; ++j) {
      complexd f = cs[j] * ph;
      J[j][i] = J[j][i - 1] + 0.5 * h * (f + f_prev[j]);
      f_prev[j] = f;
      complexd g0 = e0 * J[j][i], g1 = e1 * J[j][i];
      t.K0[j][i] = t.K0[j][i - 1] + 0.5 * h * (g0 + g0_prev[j]);
      t.K1[j][i] = t.K1[j][i - 1] + 0.5 * h * (g1 + g1_prev[j]);
      g0_prev[j] = g0;
      g1_prev[j] = g1;
    }
  }
  return t;
}

// The x2 = t2 - t2' integral couples to the coherence variable only through
// the population semigroup and the detector-1 leg at smax = T + x2 - tau2
// (diagram i) / T + x2 (diagram ii). Splitting G_pop(t) = P0 + e^{-K t} P1
// into its projectors makes that coupling separable, so x2 is contracted once
// into cumulative window covectors
//   U0(X) = int_0^X e^{-Gam2 u}    P(T + u) du,
//   U1(X) = int_0^X e^{(K-Gam2) u} P(T + u) du,   P_j(s) = inner(s, e_j),
// sampled densely enough for the detector-1 detuning carried inside P. Each
// diagram is then one oscillatory outer integral with O(1) work per node;
// a moving boundary never meets an unresolved oscillation.
complexd s2_ps_eval(S2Diagram diag, const DetectorPair& p, const TsjModel& m,
                    double refine, double span, double table_h) {
  double Gam1 = p.det1.sigma_w, Gam2 = p.det2.sigma_w;
  double w1 = p.det1.center_w, w2 = p.det2.center_w;
  double t1 = to_natural_time(p.det1.center_t);
  double t2 = to_natural_time(p.det2.center_t);
  if (t2 <= 0.0 || t1 <= 0.0) return 0.0;
  double T = t1 - t2;
  double K = m.k_up + m.k_down;
  PsTables tab = build_ps_tables(w1, Gam1, t1, m, table_h / refine);
  double Lx2 = std::min(t2, 2.0 * span / Gam2);
  if ((K - Gam2) * Lx2 > 600.0)
    throw UnsupportedRegime("physical-spectrum window tables overflow: jump rate "
                            "far above Gamma2 over the open window");
  double rate_u = eg_osc(w1, m) + Gam1 + m.gamma_e + Gam2 + K;
  double hu = 1.0 / (10.0 * rate_u * refine);
  size_t nu = static_cast<size_t>(Lx2 / hu) + 2;
  if (nu > 5000000)
    throw UnsupportedRegime("detector-2 window table needs >5e6 nodes");
  std::vector<complexd> U0[2], U1[2];
  for (int j = 0; j < 2; ++j) {
    U0[j].assign(nu, 0.0);
    U1[j].assign(nu, 0.0);
  }
  {
    SpinVector e0, e1;
    e0[0] = 1.0;
    e1[1] = 1.0;
    complexd f0_prev[2], f1_prev[2];
    f0_prev[0] = f1_prev[0] = tab.inner(T, e0);
    f0_prev[1] = f1_prev[1] = tab.inner(T, e1);
    for (size_t i = 1; i < nu; ++i) {
      double u = static_cast<double>(i) * hu;
      complexd P0c = tab.inner(T + u, e0), P1c = tab.inner(T + u, e1);
      double env0 = std::exp(-Gam2 * u), env1 = std::exp((K - Gam2) * u);
      complexd f0[2] = {env0 * P0c, env0 * P1c};
      complexd f1[2] = {env1 * P0c, env1 * P1c};
      for (int j = 0; j < 2; ++j) {
        U0[j][i] = U0[j][i - 1] + 0.5 * hu * (f0[j] + f0_prev[j]);
        U1[j][i] = U1[j][i - 1] + 0.5 * hu * (f1[j] + f1_prev[j]);
        f0_prev[j] = f0[j];
        f1_prev[j] = f1[j];
      }
    }
  }
  auto look_pair = [&](const std::vector<complexd> U[2], double X) {
    SpinVector r;
    double q = std::max(X, 0.0) / hu;
    size_t i = std::min(static_cast<size_t>(q), nu - 2);
    double f = std::min(q - static_cast<double>(i), 1.0);
    r[0] = U[0][i] + f * (U[0][i + 1] - U[0][i]);
    r[1] = U[1][i] + f * (U[1][i + 1] - U[1][i]);
    return r;
  };
  // population projector images of the spin-up start
  SpinVector a0, a1;
  if (K > 0.0) {
    a0[0] = m.k_up / K;
    a0[1] = m.k_down / K;
    a1[0] = m.k_down / K;
    a1[1] = -m.k_down / K;
  } else {
    a0[0] = 1.0;
  }
  bool di = diag == S2Diagram::i;
  double lam_out = eg_osc(w1, m) + fe_osc(w2, m) + m.gamma_f + 0.5 * Gam2 + K;
  double env_out = m.gamma_f + 0.5 * Gam2;
  double Mmax = std::min(di ? Lx2 : t2, env_out > 0.0 ? span / env_out : 1e300);
  Grid og = gl_panels(0.0, Mmax, panel_count(Mmax, lam_out, refine));
  complexd val = 0.0;
  for (size_t i = 0; i < og.size(); ++i) {
    double tau = og.x[i];
    double X = di ? Lx2 - tau : std::min(Lx2, t2 - tau);
    if (X <= 0.0) continue;
    SpinMatrix G =
        std::exp(-m.gamma_f * tau) *
        coherence_propagator(di ? CoherencePair::ef : CoherencePair::fe,
                             to_ps(tau), m);
    SpinVector y0 = G * a0;
    SpinVector u0 = look_pair(U0, X);
    complexd term = u0[0] * y0[0] + u0[1] * y0[1];
    if (K > 0.0) {
      SpinVector y1 = G * a1;
      SpinVector u1 = look_pair(U1, X);
      term += std::exp(-K * (t2 - tau)) * (u1[0] * y1[0] + u1[1] * y1[1]);
    }
    complexd ker = og.w[i] * std::exp(complexd(-0.5 * Gam2, di ? -w2 : w2) * tau);
    val += ker * term;
  }
  return m.mu_eg * m.mu_eg * m.mu_fe() * m.mu_fe() * m.rho_ff0 * val;
}

// ------------------------------------------------------------- Wigner route

std::mutex g_fftw_mutex;

complexd s1_wigner_eval(double t_ps, double w, const GateConfig& g, const TsjModel& m,
                        double refine, double span) {
  double t = to_natural_time(t_ps);
  GateConfig gg = g;
  gg.center_t = t_ps;
  gg.center_w = w;
  // relative-time spectral grid: the matter side decays only via gamma_e
  double Ltau = 1.5 * span / m.gamma_e;
  auto f = derived_frequencies(m);
  double wmax = std::max(3.0e4, 2.4 * std::max({std::abs(w), std::abs(f.w_eg_plus),
                                                std::abs(f.w_eg_minus)}));
  double dtau = 3.14159265358979323846 / wmax;
  size_t N = 1;
  while (static_cast<double>(N) * dtau < Ltau && N < (1u << 24)) N <<= 1;
  std::vector<complexd> csu(N), csd(N);
  for (size_t i = 0; i < N; ++i) {
    SpinVector cs =
        coherence_colsums(CoherencePair::ge, m.gamma_e, static_cast<double>(i) * dtau, m);
    csu[i] = cs[0];
    csd[i] = cs[1];
  }
  csu[0] *= 0.5;  // trapezoid endpoint; the far end is at e^{-1.5 span}
  csd[0] *= 0.5;
  {
    std::lock_guard<std::mutex> lk(g_fftw_mutex);
    fftw_complex* buf = fftw_alloc_complex(N);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(N), buf, buf, FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    auto run = [&](std::vector<complexd>& a) {
      for (size_t i = 0; i < N; ++i) {
        buf[i][0] = a[i].real();
        buf[i][1] = a[i].imag();
      }
      fftw_execute(plan);
      for (size_t i = 0; i < N; ++i) a[i] = complexd(buf[i][0], buf[i][1]);
    };
    run(csu);
    run(csd);
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  std::vector<double> wps(N);
  for (size_t i = 0; i < N; ++i) {
    double idx = i < N / 2 ? static_cast<double>(i)
                           : static_cast<double>(i) - static_cast<double>(N);
    wps[i] = 2.0 * 3.14159265358979323846 * idx / (static_cast<double>(N) * dtau);
  }
  // t' grid per gate shape
  Grid xg;
  double t0 = std::max(0.0, t);
  bool lorentzian = g.shape == GateShape::Lorentzian;
  if (lorentzian) {
    double L = span / (2.0 * g.sigma_t);
    xg = gl_panels(0.0, L,
                   panel_count(L, 2.0 * g.sigma_t + m.k_up + m.k_down, 2.0 * refine));
  } else {
    double Lg = std::sqrt(span + 2.0) / g.sigma_t;
    double lo = std::max(0.0, t - Lg), hi = t + Lg;
    if (hi <= lo) return 0.0;
    xg = gl_panels(lo, hi, panel_count(hi - lo, 10.0 * g.sigma_t, 2.0 * refine));
  }
  complexd acc = 0.0;
  for (size_t ix = 0; ix < xg.size(); ++ix) {
    double tp = lorentzian ? t0 + xg.x[ix] : xg.x[ix];
    double tp_ps = to_ps(tp);
    SpinVector v = population_from_u(tp, m);
    complexd s = 0.0;
    for (size_t i = 0; i < N; ++i) {
      complexd WD = lorentzian ? lorentzian_wigner(gg, tp_ps, wps[i])
                               : gaussian_wigner(gg, tp_ps, wps[i]);
      s += WD * (v[0] * csu[i] + v[1] * csd[i]);
    }
    acc += xg.w[ix] * s / static_cast<double>(N);
  }
  return -2.0 * acc.real() * m.mu_eg * m.mu_eg * m.rho_ee0;
}

}  // namespace

// ------------------------------------------------------------- public entry

double integrate_s1(double t_ps, double w, const GateConfig& gate, const TsjModel& m,
                    const QuadratureSpec& spec, ConvergenceRecord* rec) {
  double t = to_natural_time(t_ps);
  switch (gate.shape) {
    case GateShape::Lorentzian: {
      if (gate.sigma_t <= 0.0 || gate.sigma_w <= 0.0)
        throw UnsupportedRegime("Lorentzian gate needs sigma_t, sigma_w > 0");
      auto eval = [&](double r) { return s1_lor_eval(t, w, gate, m, spec, r); };
      return richardson(eval, spec, rec, "integrate_s1[lorentzian]").real();
    }
    case GateShape::Gaussian: {
      if (gate.sigma_t <= 0.0 || gate.sigma_w <= 0.0)
        throw UnsupportedRegime("Gaussian gate needs sigma_t, sigma_w > 0");
      if (spec.rule == QuadRule::Trapezoid)
        throw UnsupportedRegime(
            "trapezoid rule is wired for the Lorentzian path; use "
            "Gauss-Legendre panels for Gaussian gates");
      auto eval = [&](double r) {
        return s1_gauss_eval(t_ps, w, gate, m, r, spec.envelope_span);
      };
      return richardson(eval, spec, rec, "integrate_s1[gaussian]").real();
    }
    default: {
      if (gate.sigma_w <= 0.0)
        throw UnsupportedRegime("physical-spectrum gate needs Gamma = sigma_w > 0");
      if (spec.rule == QuadRule::Trapezoid)
        throw UnsupportedRegime(
            "trapezoid rule is wired for the Lorentzian path; use "
            "Gauss-Legendre panels for physical-spectrum gates");
      auto eval = [&](double r) {
        return s1_ps_eval(t, w, gate, m, r, spec.envelope_span);
      };
      return richardson(eval, spec, rec, "integrate_s1[physical-spectrum]").real();
    }
  }
}

complexd integrate_s2(S2Diagram diagram, const DetectorPair& pair, const TsjModel& m,
                      const QuadratureSpec& spec, ConvergenceRecord* rec) {
  if (pair.det1.shape != pair.det2.shape)
    throw UnsupportedRegime("coincidence oracle needs matching gate shapes");
  if (pair.det1.center_t < pair.det2.center_t)
    throw std::invalid_argument("detector 1 must fire at t1 >= t2");
  if (spec.rule == QuadRule::Trapezoid)
    throw UnsupportedRegime("the 4D coincidence oracle always uses Gauss-Legendre "
                            "panels (design decision); trapezoid applies to S1 only");
  if (pair.det1.shape == GateShape::Lorentzian) {
    if (pair.det1.sigma_t <= 0.0 || pair.det1.sigma_w <= 0.0 ||
        pair.det2.sigma_t <= 0.0 || pair.det2.sigma_w <= 0.0)
      throw UnsupportedRegime("Lorentzian gates need sigma_t, sigma_w > 0");
    auto eval = [&](double r) {
      return diagram == S2Diagram::i ? s2i_lor_eval(pair, m, r, spec.envelope_span)
                                     : s2ii_lor_eval(pair, m, r, spec.envelope_span);
    };
    return richardson(eval, spec, rec,
                      diagram == S2Diagram::i ? "integrate_s2[lorentzian,i]"
                                              : "integrate_s2[lorentzian,ii]");
  }
  if (pair.det1.shape == GateShape::PhysicalSpectrum) {
    if (pair.det1.sigma_w <= 0.0 || pair.det2.sigma_w <= 0.0)
      throw UnsupportedRegime("physical-spectrum gates need Gamma = sigma_w > 0");
    auto eval = [&](double r) {
      return s2_ps_eval(diagram, pair, m, r, spec.envelope_span, 1e-4);
    };
    return richardson(eval, spec, rec,
                      diagram == S2Diagram::i ? "integrate_s2[physical-spectrum,i]"
                                              : "integrate_s2[physical-spectrum,ii]");
  }
  throw UnsupportedRegime(
      "coincidence oracle covers Lorentzian and physical-spectrum gate pairs");
}

double integrate_s1_wigner(double t_ps, double w, const GateConfig& gate,
                           const TsjModel& m, const QuadratureSpec& spec,
                           ConvergenceRecord* rec) {
  if (gate.shape == GateShape::PhysicalSpectrum)
    throw UnsupportedRegime(
        "Wigner route covers Lorentzian and Gaussian gates (closed Wigner "
        "spectrograms exist for those shapes)");
  if (gate.sigma_t <= 0.0 || gate.sigma_w <= 0.0)
    throw UnsupportedRegime("Wigner route needs sigma_t, sigma_w > 0");
  if (m.gamma_e <= 0.0)
    throw UnsupportedRegime(
        "Wigner route samples the matter correlation on a finite relative-time "
        "grid and needs gamma_e > 0 for truncation; use integrate_s1");
  // Richardson probes the t' axis; the relative-time axis is a fixed spectral
  // grid with aliasing bounded far below the step-halving resolution.
  auto eval = [&](double r) {
    return s1_wigner_eval(t_ps, w, gate, m, r, spec.envelope_span);
  };
  return richardson(eval, spec, rec, "integrate_s1_wigner").real();
}

}  // namespace pcc
