// liouville.cpp - propagator closed forms, expm oracle, matter correlation
#include "pcc/liouville.hpp"

#include <cmath>

namespace pcc {

std::pair<double, double> pair_frequencies(CoherencePair pair, const TsjModel& m) {
  double d0, d1;
  if (pair == CoherencePair::eg || pair == CoherencePair::ge) {
    d0 = m.omega0;
    d1 = m.omega1;
  } else {
    d0 = m.omega0 + m.delta0;
    d1 = m.omega1 + m.delta1;
  }
  if (pair == CoherencePair::ge || pair == CoherencePair::ef) {
    d0 = -d0;
    d1 = -d1;
  }
  return {d0, d1};
}

SpinMatrix population_generator(const TsjModel& m) {
  SpinMatrix L;
  L(0, 0) = -m.k_down;
  L(0, 1) = m.k_up;
  L(1, 0) = m.k_down;
  L(1, 1) = -m.k_up;
  return L;
}

SpinMatrix coherence_generator(CoherencePair pair, const TsjModel& m) {
  auto [d0, d1] = pair_frequencies(pair, m);
  SpinMatrix G = population_generator(m);
  G(0, 0) += complexd(0.0, -(d0 + d1));
  G(1, 1) += complexd(0.0, -(d0 - d1));
  return G;
}

std::pair<complexd, complexd> eta_roots(CoherencePair pair, const TsjModel& m) {
  auto [d0, d1] = pair_frequencies(pair, m);
  const double ksum = m.k_down + m.k_up;
  // k_up = 0 makes the discriminant the perfect square (k/2 + i d1)^2; the
  // exact branch keeps eta1 = -i(d0 - d1) to the ulp, which the propagator
  // phases amplify by |eta| t otherwise.
  const complexd s =
      m.k_up == 0.0 && m.k_down > 0.0
          ? complexd(m.k_down / 2.0, d1)
          : std::sqrt(complexd(ksum * ksum / 4.0 - d1 * d1,
                               d1 * (m.k_down - m.k_up)));
  const complexd base(-ksum / 2.0, -d0);
  return {base + s, base - s};
}

SpinMatrix population_propagator(double t_ps, const TsjModel& m) {
  if (t_ps < 0.0) return SpinMatrix::zero();
  const double t = to_natural_time(t_ps);
  const double ksum = m.k_down + m.k_up;
  // (1 - e^{-K t}) / K, finite as K -> 0.
  const double f = ksum > 0.0 ? -std::expm1(-ksum * t) / ksum : t;
  return SpinMatrix::identity() + f * population_generator(m);
}

SpinMatrix coherence_propagator(CoherencePair pair, double t_ps, const TsjModel& m) {
  if (t_ps < 0.0) return SpinMatrix::zero();
  const double t = to_natural_time(t_ps);
  auto [eta1, eta2] = eta_roots(pair, m);
  const double scale = std::max(std::abs(eta1), std::abs(eta2));
  if (std::abs(eta1 - eta2) < 1e-10 * scale)
    return sle_expm_oracle(to_block(pair), t_ps, m);
  const SpinMatrix G = coherence_generator(pair, m);
  const SpinMatrix I = SpinMatrix::identity();
  const complexd inv = 1.0 / (eta1 - eta2);
  const SpinMatrix A = (G + (-eta2) * I);  // (G - eta2 I)
  const SpinMatrix B = (G + (-eta1) * I);
  return inv * (std::exp(eta1 * t) * A + (-std::exp(eta2 * t)) * B);
}

SpinMatrix sle_expm_oracle(SleBlock block, double t_ps, const TsjModel& m) {
  if (t_ps < 0.0) return SpinMatrix::zero();
  const double t = to_natural_time(t_ps);
  SpinMatrix G;
  switch (block) {
    case SleBlock::population: G = population_generator(m); break;
    case SleBlock::eg: G = coherence_generator(CoherencePair::eg, m); break;
    case SleBlock::fe: G = coherence_generator(CoherencePair::fe, m); break;
    case SleBlock::ge: G = coherence_generator(CoherencePair::ge, m); break;
    case SleBlock::ef: G = coherence_generator(CoherencePair::ef, m); break;
  }
  // Scaling and squaring: reduce ||G t / 2^s|| below 1/2, Taylor-sum to
  // machine tail, square back up. Plenty for 1e-12 on a 2x2.
  double norm = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) norm = std::max(norm, std::abs(G(i, j)) * 2.0);
  norm *= t;
  int s = 0;
  while (norm > 0.5 && s < 64) {
    norm /= 2.0;
    ++s;
  }
  const double h = t / std::ldexp(1.0, s);
  SpinMatrix A = complexd(h) * G;
  SpinMatrix R = SpinMatrix::identity();
  SpinMatrix term = SpinMatrix::identity();
  for (int n = 1; n <= 24; ++n) {
    term = complexd(1.0 / n) * (term * A);
    R = R + term;
    double tn = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) tn = std::max(tn, std::abs(term(i, j)));
    if (tn < 1e-18) break;
  }
  for (int i = 0; i < s; ++i) R = R * R;
  return R;
}

complexd matter_correlation_v1(double t_prime_ps, double tau_ps, const TsjModel& m) {
  if (m.k_up != 0.0)
    throw UnsupportedRegime(
        "matter_correlation_v1: closed form requires k_up = 0; use the "
        "propagator-product path (matter_correlation_v1_general)");
  const double tp = to_natural_time(t_prime_ps);
  const double tau = to_natural_time(tau_ps);
  const double k = m.k_down;
  const auto f = derived_frequencies(m);
  const complexd iwm(0.0, f.w_eg_minus);
  const complexd em = std::exp(iwm * tau);
  const complexd ep = std::exp(complexd(-k, f.w_eg_plus) * tau);
  const complexd amp = complexd(0.0, 2.0 * m.omega1) / complexd(k, -2.0 * m.omega1);
  return m.rho_ee0 * (em + amp * std::exp(-k * tp) * (em - ep));
}

complexd matter_correlation_v1_general(double t_prime_nat, double tau_nat,
                                       const TsjModel& m) {
  if (t_prime_nat < 0.0 || tau_nat < 0.0) return 0.0;
  const SpinMatrix Gge =
      coherence_propagator(CoherencePair::ge, to_ps(tau_nat), m);
  const SpinMatrix Gp = population_propagator(to_ps(t_prime_nat), m);
  SpinVector v0;
  v0[0] = 1.0;  // spin-up start
  const SpinVector v = Gp * v0;
  const SpinVector u = Gge * v;
  return (u[0] + u[1]) * m.rho_ee0;
}

}  // namespace pcc
