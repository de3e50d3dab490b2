// liouville.hpp - 2x2 spin-space Green's functions of the jump-modulated ladder
#pragma once

#include <utility>

#include "pcc/model.hpp"
#include "pcc/spin.hpp"

namespace pcc {

// Coherence blocks of the Liouville space. Level energies in the u spin
// state are eps^g = 0, eps^e = omega0 + omega1, eps^f = 2(omega0 + omega1) +
// delta0 + delta1 (d state: omega1, delta1 negated), so each block carries a
// signed pair of mean/jump frequency differences:
//   eg: (+omega0, +omega1)            fe: (+(omega0+delta0), +(omega1+delta1))
//   ge: (-omega0, -omega1)            ef: (-(omega0+delta0), -(omega1+delta1))
enum class CoherencePair { eg, fe, ge, ef };

enum class SleBlock { population, eg, fe, ge, ef };

inline SleBlock to_block(CoherencePair p) {
  switch (p) {
    case CoherencePair::eg: return SleBlock::eg;
    case CoherencePair::fe: return SleBlock::fe;
    case CoherencePair::ge: return SleBlock::ge;
    default: return SleBlock::ef;
  }
}

// (mean, jump) frequency difference of a coherence block, signed.
std::pair<double, double> pair_frequencies(CoherencePair pair, const TsjModel& m);

// Spin-space generator of a coherence block: jump kinetics plus -i * (level
// frequency difference) on the diagonal. No dephasing: gamma_e/gamma_f enter
// the signals as additive detuning widths, never the propagators.
SpinMatrix coherence_generator(CoherencePair pair, const TsjModel& m);

// Jump kinetics alone (population blocks): [[-k_down, k_up], [k_down, -k_up]].
SpinMatrix population_generator(const TsjModel& m);

// Eigenvalues of the coherence-block generator,
//   eta_{1,2} = -(k_d+k_u)/2 - i*d0 +- sqrt((k_d+k_u)^2/4 - d1^2 + i*d1*(k_d-k_u)),
// principal square-root branch; eta1 takes the + sign. For pair eg at k_u=0
// this gives eta1 = -i*w_eg^-, eta2 = -k - i*w_eg^+.
std::pair<complexd, complexd> eta_roots(CoherencePair pair, const TsjModel& m);

// exp(G t) for t >= 0 (zero matrix for t < 0); t in ps. The equilibration
// form 1 + (1 - e^{-(k_u+k_d)t})/(k_u+k_d) * L; at k_u = 0 this is
// [[e^{-kt}, 0], [1-e^{-kt}, 1]].
SpinMatrix population_propagator(double t_ps, const TsjModel& m);

// Two-exponential closed form ((G - eta2)e^{eta1 t} - (G - eta1)e^{eta2 t})
// / (eta1 - eta2); t in ps, zero matrix for t < 0. Near-degenerate roots
// (|eta1-eta2| < 1e-10 * max|eta|) fall back to the matrix exponential to
// dodge the removable-singularity cancellation.
SpinMatrix coherence_propagator(CoherencePair pair, double t_ps, const TsjModel& m);

// Independent propagator oracle: scaling-and-squaring matrix exponential of
// the block generator, accurate to ~1e-12. t in ps.
SpinMatrix sle_expm_oracle(SleBlock block, double t_ps, const TsjModel& m);

// Low-temperature scalar matter correlation for the single-photon signal:
//   rho_ee0 * [e^{i w_eg^- tau} + (2i omega1/(k - 2i omega1)) e^{-k t'}
//              (e^{i w_eg^- tau} - e^{(-k + i w_eg^+) tau})]
// equal to (1,1) * G_ge(tau) * G_pop(t') * (1,0)^T * rho_ee0 (spin-up start,
// trace over the bath). Dephasing-free; consumers multiply e^{-gamma_e tau}
// themselves. Times in ps. Requires k_up = 0.
complexd matter_correlation_v1(double t_prime_ps, double tau_ps, const TsjModel& m);

// Same contraction built from the propagator ops, valid for any k_up >= 0;
// used by the quadrature oracle. Times in natural units (already converted).
complexd matter_correlation_v1_general(double t_prime_nat, double tau_nat,
                                       const TsjModel& m);

}  // namespace pcc
