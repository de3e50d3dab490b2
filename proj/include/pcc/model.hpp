// model.hpp - oscillator/bath parameters, gate configs, derived frequencies
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "pcc/units.hpp"

namespace pcc {

using complexd = std::complex<double>;

// Thrown when a closed form is asked for outside its regime (e.g. k_up > 0);
// the message names the oracle routine that does cover the regime.
struct UnsupportedRegime : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Three-level g/e/f ladder with two-state-jump (u/d) modulation. All rates
// and frequencies in cm^-1. The u state shifts the e level by +omega1 and the
// f anharmonicity by +delta1; d shifts both down.
struct TsjModel {
  double omega0 = 12500.0;  // mean e-level frequency
  double omega1 = 125.0;    // jump amplitude of the e-level frequency
  double delta0 = 250.0;    // mean anharmonicity
  double delta1 = 5.0;      // jump amplitude of the anharmonicity
  double k_up = 0.0;        // d -> u jump rate (0 in the low-temperature limit)
  double k_down = 7.68;     // u -> d jump rate
  double gamma_e = 0.0;     // optional e-coherence dephasing
  double gamma_f = 0.0;     // optional f-coherence dephasing
  double mu_eg = 1.0;       // g->e transition dipole (arbitrary units)
  double rho_ee0 = 1.0;     // initial e population
  double rho_ff0 = 1.0;     // initial f population

  // Fixed by the ladder: the e->f dipole is sqrt(2) times the g->e dipole.
  double mu_fe() const { return std::sqrt(2.0) * mu_eg; }
};

enum class GateShape { Gaussian, Lorentzian, PhysicalSpectrum };

// One detector gate. sigma_w doubles as the filter bandwidth Gamma for the
// PhysicalSpectrum shape (whose single-parameter filter has no sigma_t).
struct GateConfig {
  GateShape shape = GateShape::Lorentzian;
  double sigma_t = 1.0;   // time-gate bandwidth [cm^-1]; unused for PhysicalSpectrum
  double sigma_w = 1.0;   // frequency-gate bandwidth [cm^-1]
  double center_t = 0.0;  // detection time [ps]
  double center_w = 0.0;  // detection frequency [cm^-1]
};

struct DerivedFrequencies {
  double w_eg_plus;   // omega0 + omega1
  double w_eg_minus;  // omega0 - omega1
  double w_fe_plus;   // omega0 + delta0 + (omega1 + delta1)
  double w_fe_minus;  // omega0 + delta0 - (omega1 + delta1)
};

inline DerivedFrequencies derived_frequencies(const TsjModel& m) {
  return {m.omega0 + m.omega1, m.omega0 - m.omega1,
          m.omega0 + m.delta0 + (m.omega1 + m.delta1),
          m.omega0 + m.delta0 - (m.omega1 + m.delta1)};
}

// (w - w_res) - i*(sigma_t + sigma_w + dephasing). The dephasing enters the
// signals only through this additive width (documented model choice; the
// scan metadata flags when it is active).
inline complexd complex_detuning(double w, double w_res, const GateConfig& gate,
                                 double dephasing = 0.0) {
  return {w - w_res, -(gate.sigma_t + gate.sigma_w + dephasing)};
}

}  // namespace pcc
