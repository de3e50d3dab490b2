// gates.cpp - closed-form spectrogram evaluations
#include "pcc/gates.hpp"

#include <cmath>
#include <numbers>

namespace pcc {

GaussianBandwidths gaussian_bandwidths(const GateConfig& gate) {
  const double st2 = gate.sigma_t * gate.sigma_t;
  const double sw2 = gate.sigma_w * gate.sigma_w;
  const double swt = std::sqrt(st2 + sw2);
  const double stt = std::sqrt(st2 + 1.0 / (1.0 / sw2 + 1.0 / st2));
  return {swt, stt, gate.sigma_w / swt, st2 / (st2 + sw2)};
}

complexd gaussian_spectrogram(const GateConfig& gate, double t_prime_ps,
                              double tau_ps) {
  const double tr = to_natural_time(t_prime_ps - gate.center_t);
  const double tau = to_natural_time(tau_ps);
  const double st2 = gate.sigma_t * gate.sigma_t;
  const double swt2 = st2 + gate.sigma_w * gate.sigma_w;
  const complexd expo = -st2 * tr * tr - 0.5 * swt2 * tau * tau -
                        complexd(st2 * tr, gate.center_w) * tau;
  return gate.sigma_w / std::sqrt(2.0 * std::numbers::pi) * std::exp(expo);
}

complexd gaussian_wigner(const GateConfig& gate, double t_prime_ps, double w_prime) {
  const double tr = to_natural_time(t_prime_ps - gate.center_t);
  const double d = w_prime - gate.center_w;
  const GaussianBandwidths b = gaussian_bandwidths(gate);
  const complexd expo(-0.5 * b.sigma_t_tilde * b.sigma_t_tilde * tr * tr -
                          d * d / (2.0 * b.sigma_w_tilde * b.sigma_w_tilde),
                      -b.a_coef * d * tr);
  return b.n_d * std::exp(expo);
}

complexd lorentzian_spectrogram(const GateConfig& gate, double t_prime_ps,
                                double tau_ps) {
  const double tr = to_natural_time(t_prime_ps - gate.center_t);
  const double tau = to_natural_time(tau_ps);
  if (tr < 0.0 || tr + tau < 0.0) return 0.0;  // theta(0) = 1 keeps boundaries
  const complexd env =
      std::exp(-complexd(gate.sigma_t, gate.center_w) * tau - 2.0 * gate.sigma_t * tr);
  const double br = std::exp(-gate.sigma_w * std::abs(tau));
  return env * br / (2.0 * gate.sigma_w);
}

complexd lorentzian_wigner(const GateConfig& gate, double t_prime_ps, double w_prime) {
  const double tr = to_natural_time(t_prime_ps - gate.center_t);
  if (tr < 0.0) return 0.0;
  const complexd id(0.0, w_prime - gate.center_w);
  const complexd b1 = -1.0 / (id - gate.sigma_t - gate.sigma_w);
  const complexd den = id - gate.sigma_t + gate.sigma_w;
  const complexd b2 = (1.0 - std::exp(-den * tr)) / den;
  return (b1 + b2) * std::exp(-2.0 * gate.sigma_t * tr) / (2.0 * gate.sigma_w);
}

complexd physical_spectrum_spectrogram(const GateConfig& gate, double t_prime_ps,
                                       double tau_ps) {
  const double x = to_natural_time(gate.center_t - t_prime_ps);  // t - t'
  const double tau = to_natural_time(tau_ps);
  if (x < 0.0 || x - tau < 0.0) return 0.0;
  const double gam = gate.sigma_w;  // Gamma
  return std::exp(-gam * x + complexd(0.5 * gam, -gate.center_w) * tau);
}

SpectrogramSample sample_spectrogram(const GateConfig& gate, double t_prime_ps,
                                     double tau_ps) {
  complexd v;
  switch (gate.shape) {
    case GateShape::Gaussian: v = gaussian_spectrogram(gate, t_prime_ps, tau_ps); break;
    case GateShape::Lorentzian:
      v = lorentzian_spectrogram(gate, t_prime_ps, tau_ps);
      break;
    case GateShape::PhysicalSpectrum:
      v = physical_spectrum_spectrogram(gate, t_prime_ps, tau_ps);
      break;
  }
  return {v, t_prime_ps, tau_ps};
}

}  // namespace pcc
