// gates.hpp - detector spectrograms D(t,w;t',tau) and Wigner spectrograms W_D
#pragma once

#include "pcc/model.hpp"

namespace pcc {

// One evaluated spectrogram point, with the coordinates it was taken at.
struct SpectrogramSample {
  complexd value;
  double t_prime_ps;
  double tau_ps;
};

// Effective Gaussian time/frequency resolutions. The joint resolution always
// satisfies sigma_w_tilde / sigma_t_tilde > 1 (Fourier uncertainty) even
// though the raw gate parameters are independent.
struct GaussianBandwidths {
  double sigma_w_tilde;  // sqrt(sigma_t^2 + sigma_w^2)
  double sigma_t_tilde;  // sqrt(sigma_t^2 + 1/(sigma_w^-2 + sigma_t^-2))
  double n_d;            // Wigner normalization sigma_w / sigma_w_tilde
  double a_coef;         // cross-term coefficient sigma_t^2/(sigma_t^2+sigma_w^2)
};

GaussianBandwidths gaussian_bandwidths(const GateConfig& gate);

// Gaussian gate:
//   D = sigma_w/sqrt(2 pi) * exp(-sigma_t^2 (t'-t)^2 - 1/2 sigma_w_tilde^2 tau^2
//                                - (sigma_t^2 (t'-t) + i w) tau).
// The (t'-t)^2 coefficient is the full sigma_t^2: that value (not sigma_t^2/2)
// is what the defining w''-integral of the gate pair produces, and the
// Wigner-consistency tests below hold it to that form. t', tau in ps; the
// gate's center_t (ps) and center_w (cm^-1) are the detection point.
complexd gaussian_spectrogram(const GateConfig& gate, double t_prime_ps, double tau_ps);

// Gaussian Wigner spectrogram (tau -> w' transform of the above):
//   W_D = N_D * exp(-1/2 sigma_t_tilde^2 (t'-t)^2 - (w'-w)^2/(2 sigma_w_tilde^2)
//                   - i A (w'-w)(t'-t)),  N_D = sigma_w / sigma_w_tilde.
// N_D is fixed by the transform itself; the dimensional bookkeeping variant
// 1/(sigma_t sigma_w_tilde) does not reproduce the tau-integral.
complexd gaussian_wigner(const GateConfig& gate, double t_prime_ps, double w_prime);

// Lorentzian gate (forward-looking: the time gate opens at t and decays with
// memory 1/(2 sigma_t) after it):
//   D = theta(t'-t) theta(t'+tau-t) e^{-(i w + sigma_t) tau - 2 sigma_t (t'-t)}
//       * [theta(tau) e^{-sigma_w tau} + theta(-tau) e^{+sigma_w tau}] / (2 sigma_w)
// with theta(0) = 1.
complexd lorentzian_spectrogram(const GateConfig& gate, double t_prime_ps, double tau_ps);

// Lorentzian Wigner spectrogram; leading sign fixed by the tau-transform:
//   W_D = +theta(t'-t) e^{-2 sigma_t (t'-t)} / (2 sigma_w) *
//         [ -1/(i d - sigma_t - sigma_w)
//           + (1 - e^{-(i d - sigma_t + sigma_w)(t'-t)}) / (i d - sigma_t + sigma_w) ],
//   d = w' - w.
complexd lorentzian_wigner(const GateConfig& gate, double t_prime_ps, double w_prime);

// Physical-spectrum gate (single filter bandwidth Gamma = gate.sigma_w),
// backward-looking: theta(t-t') theta(t-t'-tau). Carrier orientation is the
// resonant one, e^{-i w tau}: the filtered-mode amplitude
// A(t) = int^t dt1 e^{(i w - Gamma/2)(t - t1)} E(t1) puts e^{-i w tau} on the
// correlation kernel, and only that sign peaks the signal at the emission
// lines. Modulus: e^{-Gamma (2(t-t') - tau) / 2}.
//   D_ps = theta(t-t') theta(t-t'-tau) e^{-Gamma (t-t')} e^{(-i w + Gamma/2) tau}.
complexd physical_spectrum_spectrogram(const GateConfig& gate, double t_prime_ps,
                                       double tau_ps);

// Convenience: evaluate the gate's spectrogram (by shape) into a sample record.
SpectrogramSample sample_spectrogram(const GateConfig& gate, double t_prime_ps,
                                     double tau_ps);

}  // namespace pcc
