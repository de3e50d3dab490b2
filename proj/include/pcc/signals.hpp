// signals.hpp - closed-form gated signals S1, S2 (diagrams i/ii), and g2
#pragma once

#include <cstdint>

#include "pcc/model.hpp"

namespace pcc {

// Two detectors; det1 fires at the later time (center_t in ps).
struct DetectorPair {
  GateConfig det1;  // (t1, w1, sigma_t1, sigma_w1)
  GateConfig det2;  // (t2, w2, sigma_t2, sigma_w2)
};

// --- numerically stable primitives used by the closed forms ---------------

// phi1(z) = (e^z - 1)/z, series below |z| = 1e-6.
complexd phi1(complexd z);

// E(x,y;T) = (e^{xT} - e^{yT})/(x - y) = T e^{yT} phi1((x-y)T), stable.
complexd ediv(complexd x, complexd y, double T);

// Divided difference (phi1(z+h) - phi1(z))/h with the analytic derivative
// phi1'(z) = (e^z (z-1) + 1)/z^2 taking over for |h| < 1e-7 max(1,|z|).
complexd dphi1_div(complexd z, complexd h);

// Triple integral of e^{a tau + b s + c x} over tau, x >= 0 and
// s >= max(0, T - tau - x), damped by e^{-w (s + tau + x - T)} (detector 1's
// time-gate envelope opening at lag T). Exact closed form:
//   [ (E(c,a;T) + e^{cT}/(w-c))/(w-a) + (E(c,a;T) - E(c,b;T))/(a-b) ] / (w-b).
complexd master_i(complexd a, complexd b, complexd c, double w, double T);

// Integral of e^{at m + b s + c x} over 0 <= m <= x, s >= max(0, T - x),
// damped by e^{-w (x + s - T)}:
//   [ T^2 e^{bT} Dphi1((c-b)T, at T)
//     + e^{cT} (T phi1(at T)(w-c) + 1) / ((w-c-at)(w-c)) ] / (w-b).
complexd master_ii(complexd at, complexd b, complexd c, double w, double T);

// --- signals ---------------------------------------------------------------

// Single-photon signal, Lorentzian gate, low-temperature (k_up = 0) closed
// form: -Im of the two-state bracket divided by sigma_w, times
// |mu_eg|^2 rho_ee0. Negative t is the gate tail before preparation and is
// handled exactly (the closed form gains an e^{2 sigma_t t} factor). The
// gate's center fields are ignored; (t, w) arguments are authoritative.
double s1_closed(double t_ps, double w, const GateConfig& gate, const TsjModel& m,
                 double scale = 1.0);

// Coincidence diagram i (non-rephasing pathway), complex value BEFORE the
// 2 Re reduction. Detection points and widths come from the pair's gates.
// Exact finite-(t1-t2) evaluation via the master integrals above; reduces to
// stationary uncoupled-cascade terms as t1 - t2 -> infinity.
complexd s2_i_closed(const DetectorPair& pair, const TsjModel& m);

// Coincidence diagram ii (rephasing-like pathway; detector-2 frequency enters
// conjugated), complex value before 2 Re.
complexd s2_ii_closed(const DetectorPair& pair, const TsjModel& m);

// 2 Re(S_i + S_ii) * scale. Diagrams iii/iv are the conjugates of i/ii, so
// this discards the imaginary part exactly once.
double s2_total(const DetectorPair& pair, const TsjModel& m, double scale = 1.0);

// s2_total / (S1(det1) * S1_fe(det2)). The detector-2 denominator uses the
// f->e emission analog of the S1 closed form (see fe_analog). Denominator
// magnitudes below 1e-30 * |numerator| yield NaN (masked sample), never a
// throw. Scale cancels in the ratio.
double g2_normalized(const DetectorPair& pair, const TsjModel& m);

// Model substitution for the f->e emission line: the fe coherence block has
// the same two-state structure as eg with omega0 -> omega0 + delta0,
// omega1 -> omega1 + delta1, dephasing gamma_f, dipole mu_fe, population
// rho_ff0. Lets every eg-transition formula serve the fe transition.
TsjModel fe_analog(const TsjModel& m);

// Count of exponent clamps (real part > +50) applied inside the closed
// forms since the last reset; nonzero means some regime overflowed and the
// clamped values are diagnostic only.
std::uint64_t exp_guard_trips();
void reset_exp_guard();

}  // namespace pcc
