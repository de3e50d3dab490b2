// oracle.hpp - brute-force quadrature of the gated convolution integrals
#pragma once

#include <stdexcept>
#include <string>

#include "pcc/model.hpp"
#include "pcc/signals.hpp"

namespace pcc {

enum class QuadRule { Trapezoid, GaussLegendrePanels };

// Step/truncation policy for oracle integrals. Panel counts scale with the
// local (oscillation + decay) rate so each 16-point Gauss-Legendre panel
// spans at most ~4 radians-plus-decades; `refine` multiplies every panel
// count (and divides every dense-table step), so doubling it is the
// step-halving probe. Domains truncate where the decaying envelope falls
// below e^{-envelope_span} (~1e-10) of its start.
struct QuadratureSpec {
  QuadRule rule = QuadRule::GaussLegendrePanels;
  double target_rel_err = 1e-4;
  double refine = 1.0;
  double envelope_span = 23.0;
  // Convergence failures with |est(h) - est(h/2)| below this absolute floor
  // do not throw (guards near-zero grid cells where the relative test is
  // meaningless); the record still carries the true relative change.
  double abs_floor = 0.0;
};

// Step-halving (Richardson) record attached to every oracle evaluation.
struct ConvergenceRecord {
  complexd coarse;     // estimate at the requested refine
  complexd fine;       // estimate at twice the refine
  double rel_change;   // |coarse - fine| / max(|fine|, 1e-300)
};

struct ConvergenceError : std::runtime_error {
  complexd coarse, fine;
  double rel_change;
  ConvergenceError(const std::string& msg, complexd c, complexd f, double r)
      : std::runtime_error(msg), coarse(c), fine(f), rel_change(r) {}
};

enum class S2Diagram { i, ii };

// 2D quadrature of the gated single-photon convolution (-2 Re of the
// spectrogram x matter-correlation integral) for ANY gate shape and any
// k_up >= 0; propagator-based matter path, dephasing applied as the
// multiplicative e^{-gamma_e tau} envelope (the additive-width convention of
// the closed forms, expressed in the time domain). The Trapezoid rule is
// wired for the Lorentzian path with step <= min(1/(10 osc_max),
// 1/(10 sigma_max)), where osc_max is the largest carrier-removed detuning;
// other shapes require Gauss-Legendre panels. Returns the fine estimate.
double integrate_s1(double t_ps, double w, const GateConfig& gate, const TsjModel& m,
                    const QuadratureSpec& spec, ConvergenceRecord* rec = nullptr);

// 4D quadrature of the coincidence diagrams. Diagram i integrates the
// positive-tau2 spectrogram branch of detector 2, diagram ii the
// negative-tau2 branch; both use detector 1's positive-tau1 branch. Domain
// boundaries honor every step function, including the propagator thetas
// (t1' - t2' - tau2 >= 0 for diagram i, t1' - t2' >= 0 for diagram ii).
// Lorentzian-Lorentzian and PhysicalSpectrum-PhysicalSpectrum detector pairs
// are supported; the 4D path always uses Gauss-Legendre panels.
complexd integrate_s2(S2Diagram diagram, const DetectorPair& pair, const TsjModel& m,
                      const QuadratureSpec& spec, ConvergenceRecord* rec = nullptr);

// Wigner-route evaluation of the single-photon signal: the matter
// correlation is FFT-transformed over tau and paired with the closed-form
// Wigner spectrogram over (t', w'). Lorentzian or Gaussian gates. Agrees
// with integrate_s1 by Parseval; the spot-check tolerance is 1e-3 combined.
double integrate_s1_wigner(double t_ps, double w, const GateConfig& gate,
                           const TsjModel& m, const QuadratureSpec& spec,
                           ConvergenceRecord* rec = nullptr);

}  // namespace pcc
