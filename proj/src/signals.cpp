// signals.cpp - master integrals and closed-form signal assembly
#include "pcc/signals.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pcc {

namespace {

std::atomic<std::uint64_t> g_exp_guard{0};

// All physical exponents here decay; a positive real part beyond +50 means a
// pathological parameter set. Clamp (keeping the phase) and count it instead
// of overflowing to inf and poisoning the whole bracket.
complexd gexp(complexd z) {
  if (z.real() > 50.0) {
    g_exp_guard.fetch_add(1, std::memory_order_relaxed);
    z = complexd(50.0, z.imag());
  }
  return std::exp(z);
}

void require_lorentzian(const GateConfig& g, const char* who) {
  if (g.shape != GateShape::Lorentzian)
    throw UnsupportedRegime(std::string(who) +
                            ": closed form exists for Lorentzian gates only; use "
                            "the quadrature oracle for other shapes");
}

void require_low_temperature(const TsjModel& m, const char* who) {
  if (m.k_up != 0.0)
    throw UnsupportedRegime(std::string(who) +
                            ": closed form requires k_up = 0; use the quadrature "
                            "oracle for k_up > 0");
}

struct Monomial {
  complexd coef;
  complexd alpha;  // tau1-conjugate rate (detector-1 leg)
  complexd beta;   // tau2 rate (diagram i) or -tau2 rate mu (diagram ii)
  complexd gamma;  // s-leg population rate (0 or -k)
  complexd delta;  // t2'-leg population rate (0 or -k)
};

// Five-term expansion of the matter four-point chain at k_up = 0. A and A'
// are the jump-sideband amplitudes of the eg and fe coherence blocks.
void terms_i(const TsjModel& m, Monomial out[5]) {
  const auto f = derived_frequencies(m);
  const double k = m.k_down;
  const complexd A = m.omega1 == 0.0
                         ? complexd(0.0)
                         : complexd(0.0, -2.0 * m.omega1) / complexd(k, -2.0 * m.omega1);
  const double o1p = m.omega1 + m.delta1;
  const complexd Ap =
      o1p == 0.0 ? complexd(0.0) : complexd(0.0, -2.0 * o1p) / complexd(k, -2.0 * o1p);
  const complexd ap(-k - m.gamma_e, f.w_eg_plus);
  const complexd am(-m.gamma_e, f.w_eg_minus);
  const complexd bp(-k - m.gamma_f, f.w_fe_plus);
  const complexd bm(-m.gamma_f, f.w_fe_minus);
  const complexd mk(-k, 0.0), z0(0.0, 0.0);
  out[0] = {A, ap, bp, mk, mk};
  out[1] = {-A, am, bp, mk, mk};
  out[2] = {complexd(1.0), am, bm, z0, z0};
  out[3] = {Ap, am, bp, z0, mk};
  out[4] = {-Ap, am, bm, z0, mk};
}

void terms_ii(const TsjModel& m, Monomial out[5]) {
  const auto f = derived_frequencies(m);
  const double k = m.k_down;
  const complexd A = m.omega1 == 0.0
                         ? complexd(0.0)
                         : complexd(0.0, -2.0 * m.omega1) / complexd(k, -2.0 * m.omega1);
  const double o1p = m.omega1 + m.delta1;
  const complexd Aps =
      o1p == 0.0 ? complexd(0.0) : complexd(0.0, 2.0 * o1p) / complexd(k, 2.0 * o1p);
  const complexd ap(-k - m.gamma_e, f.w_eg_plus);
  const complexd am(-m.gamma_e, f.w_eg_minus);
  const complexd up(-k - m.gamma_f, -f.w_fe_plus);
  const complexd um(-m.gamma_f, -f.w_fe_minus);
  const complexd mk(-k, 0.0), z0(0.0, 0.0);
  out[0] = {A, ap, up, mk, mk};
  out[1] = {-A, am, up, mk, mk};
  out[2] = {complexd(1.0), am, um, z0, z0};
  out[3] = {Aps, am, up, z0, mk};
  out[4] = {-Aps, am, um, z0, mk};
}

void validate_pair(const DetectorPair& p, const char* who) {
  require_lorentzian(p.det1, who);
  require_lorentzian(p.det2, who);
  if (p.det1.center_t < p.det2.center_t)
    throw std::invalid_argument(std::string(who) +
                                ": detector 1 must fire at or after detector 2 "
                                "(t1 >= t2)");
}

}  // namespace

complexd phi1(complexd z) {
  if (std::abs(z) < 1e-6)
    return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return (gexp(z) - 1.0) / z;
}

complexd ediv(complexd x, complexd y, double T) {
  return T * gexp(y * T) * phi1((x - y) * T);
}

complexd dphi1_div(complexd z, complexd h) {
  if (std::abs(h) < 1e-7 * std::max(1.0, std::abs(z))) {
    if (std::abs(z) < 1e-4)
      return 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0;
    return (gexp(z) * (z - 1.0) + 1.0) / (z * z);
  }
  return (phi1(z + h) - phi1(z)) / h;
}

complexd master_i(complexd a, complexd b, complexd c, double w, double T) {
  const complexd eca = ediv(c, a, T);
  const complexd p1 = (eca + gexp(c * T) / (w - c)) / (w - a);
  const complexd p2 = (eca - ediv(c, b, T)) / (a - b);
  return (p1 + p2) / (w - b);
}

complexd master_ii(complexd at, complexd b, complexd c, double w, double T) {
  const complexd termE = T * T * gexp(b * T) * dphi1_div((c - b) * T, at * T);
  const complexd termX =
      gexp(c * T) * (T * phi1(at * T) * (w - c) + 1.0) / ((w - c - at) * (w - c));
  return (termE + termX) / (w - b);
}

double s1_closed(double t_ps, double w, const GateConfig& gate, const TsjModel& m,
                 double scale) {
  require_lorentzian(gate, "s1_closed");
  require_low_temperature(m, "s1_closed");
  const double t = to_natural_time(t_ps);
  const double sT = gate.sigma_t, sw = gate.sigma_w;
  const auto f = derived_frequencies(m);
  const double geff = sT + sw + m.gamma_e;
  const complexd dm(w - f.w_eg_minus, -geff);
  const complexd dp(w - f.w_eg_plus, -geff);
  const double k = m.k_down;
  // Gate tail before preparation: for t < 0 both time integrals start at the
  // preparation instant instead of t, so e^{-kt} -> 1 and the whole bracket
  // picks up the gate envelope e^{2 sigma_t t}.
  const double ekt = std::exp(-k * std::max(t, 0.0));
  const double env = t < 0.0 ? std::exp(2.0 * sT * t) : 1.0;
  const complexd jump = complexd(0.0, 2.0 * m.omega1) * ekt /
                        (complexd(k, -2.0 * m.omega1) * (k + 2.0 * sT));
  const complexd bracket =
      1.0 / (2.0 * sT * dm) + jump * (1.0 / dm - 1.0 / (dp - complexd(0.0, k)));
  return -std::imag(bracket) / sw * env * m.mu_eg * m.mu_eg * m.rho_ee0 * scale;
}

complexd s2_i_closed(const DetectorPair& pair, const TsjModel& m) {
  validate_pair(pair, "s2_i_closed");
  require_low_temperature(m, "s2_i_closed");
  const double sT1 = pair.det1.sigma_t, sw1 = pair.det1.sigma_w;
  const double sT2 = pair.det2.sigma_t, sw2 = pair.det2.sigma_w;
  const double w1 = pair.det1.center_w, w2 = pair.det2.center_w;
  const double T = to_natural_time(pair.det1.center_t - pair.det2.center_t);
  const double t2n = to_natural_time(pair.det2.center_t);
  const double wg = 2.0 * sT1;
  Monomial tm[5];
  terms_i(m, tm);
  complexd tot = 0.0;
  for (const Monomial& q : tm) {
    const complexd F1 = 1.0 / (complexd(sT1 + sw1, w1) - q.alpha);
    const complexd a = q.beta - complexd(sT2 + sw2, w2);
    const complexd c = q.delta - 2.0 * sT2;
    tot += q.coef * F1 * gexp(q.delta * t2n) * master_i(a, q.gamma, c, wg, T);
  }
  const double mu2 = m.mu_eg * m.mu_eg * m.mu_fe() * m.mu_fe();
  return mu2 * m.rho_ff0 / (4.0 * sw1 * sw2) * tot;
}

complexd s2_ii_closed(const DetectorPair& pair, const TsjModel& m) {
  validate_pair(pair, "s2_ii_closed");
  require_low_temperature(m, "s2_ii_closed");
  const double sT1 = pair.det1.sigma_t, sw1 = pair.det1.sigma_w;
  const double sT2 = pair.det2.sigma_t, sw2 = pair.det2.sigma_w;
  const double w1 = pair.det1.center_w, w2 = pair.det2.center_w;
  const double T = to_natural_time(pair.det1.center_t - pair.det2.center_t);
  const double t2n = to_natural_time(pair.det2.center_t);
  const double wg = 2.0 * sT1;
  Monomial tm[5];
  terms_ii(m, tm);
  complexd tot = 0.0;
  for (const Monomial& q : tm) {
    const complexd F1 = 1.0 / (complexd(sT1 + sw1, w1) - q.alpha);
    const complexd at = q.beta + complexd(sT2 - sw2, w2) - q.delta;
    const complexd c = q.delta - 2.0 * sT2;
    tot += q.coef * F1 * gexp(q.delta * t2n) * master_ii(at, q.gamma, c, wg, T);
  }
  const double mu2 = m.mu_eg * m.mu_eg * m.mu_fe() * m.mu_fe();
  return mu2 * m.rho_ff0 / (4.0 * sw1 * sw2) * tot;
}

double s2_total(const DetectorPair& pair, const TsjModel& m, double scale) {
  return 2.0 * std::real(s2_i_closed(pair, m) + s2_ii_closed(pair, m)) * scale;
}

TsjModel fe_analog(const TsjModel& m) {
  TsjModel a = m;
  a.omega0 = m.omega0 + m.delta0;
  a.omega1 = m.omega1 + m.delta1;
  a.delta0 = 0.0;
  a.delta1 = 0.0;
  a.gamma_e = m.gamma_f;
  a.mu_eg = m.mu_fe();
  a.rho_ee0 = m.rho_ff0;
  return a;
}

double g2_normalized(const DetectorPair& pair, const TsjModel& m) {
  const double num = s2_total(pair, m);
  const double d1 =
      s1_closed(pair.det1.center_t, pair.det1.center_w, pair.det1, m);
  const double d2 = s1_closed(pair.det2.center_t, pair.det2.center_w, pair.det2,
                              fe_analog(m));
  const double den = d1 * d2;
  if (std::abs(den) < 1e-30 * std::abs(num))
    return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

std::uint64_t exp_guard_trips() { return g_exp_guard.load(std::memory_order_relaxed); }
void reset_exp_guard() { g_exp_guard.store(0, std::memory_order_relaxed); }

}  // namespace pcc
