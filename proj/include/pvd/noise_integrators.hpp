#pragma once

#include "pvd/dynamics.hpp"
#include "pvd/rng.hpp"

#include <cmath>
#include <span>
#include <string>

namespace pvd {

enum class NoiseKind { MT2, W2Ito1 };

/// Which auxiliary evaluation points the integrator consumes: none, X^(1), or X^(1) and X^(2).
enum class NoiseVariant { Base, Mod1, Mod2 };

struct NoiseMethodKind {
  NoiseKind kind = NoiseKind::W2Ito1;
  NoiseVariant variant = NoiseVariant::Base;
};

inline std::size_t aux_arity(NoiseVariant v) {
  switch (v) {
    case NoiseVariant::Base: return 0;
    case NoiseVariant::Mod1: return 1;
    case NoiseVariant::Mod2: return 2;
  }
  return 0;
}

std::string noise_name(NoiseKind kind);
NoiseKind parse_noise(const std::string& name);
NoiseVariant parse_noise_variant(const std::string& name);

/// Sigma tensor evaluations made by one increment.
int sigma_evaluations_per_increment(NoiseMethodKind kind);

namespace detail {

template <Dynamics M>
typename M::VecType mt2_increment(NoiseVariant variant, const M& m, const typename M::VecType& x,
                                  std::span<const typename M::VecType> aux, double h,
                                  const NoiseDraws<M::dim>& draws, EvalCounters& counters) {
  using V = typename M::VecType;
  const int d = m.dimension();
  const double s = m.sigma();
  const double sqrt_h = std::sqrt(h);

  // Sigma at the point that scales the perturbations.
  const typename M::MatType S = m.sigma_matrix(variant == NoiseVariant::Mod2 ? aux[1] : x);
  counters.sigma_columns += d;

  V inc = V::Zero(d);
  V j_row(d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      j_row[b] = draws.J(a, b);
    }
    const V shift = (h * s) * (S * j_row);
    inc += (0.5 * s) * (m.sigma_column(V(x + shift), a) - m.sigma_column(V(x - shift), a));
  }
  counters.sigma_columns += 2 * d;

  const V& centre = variant == NoiseVariant::Base ? x : aux[0];
  const V shift = (std::sqrt(0.5 * h) * s) * (S * draws.chi);
  const typename M::MatType plus = m.sigma_matrix(V(centre + shift));
  const typename M::MatType minus = m.sigma_matrix(V(centre - shift));
  counters.sigma_columns += 2 * d;
  inc += (0.5 * sqrt_h * s) * ((plus + minus) * draws.R);
  return inc;
}

template <Dynamics M>
typename M::VecType w2ito1_increment(NoiseVariant variant, const M& m,
                                     const typename M::VecType& x,
                                     std::span<const typename M::VecType> aux, double h,
                                     const NoiseDraws<M::dim>& draws, EvalCounters& counters) {
  using V = typename M::VecType;
  using Mt = typename M::MatType;
  const int d = m.dimension();
  const double s = m.sigma();
  const double sqrt_h = std::sqrt(h);

  const Mt S0 = m.sigma_matrix(x);
  counters.sigma_columns += d;
  Mt stage_sigma;
  if (variant == NoiseVariant::Mod2) {
    stage_sigma = m.sigma_matrix(aux[1]);
    counters.sigma_columns += d;
  }
  const Mt& P = variant == NoiseVariant::Mod2 ? stage_sigma : S0;
  const V& centre = variant == NoiseVariant::Base ? x : aux[0];

  V inc = V::Zero(d);
  V jhat_row(d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      jhat_row[b] = b == a ? 0.0 : draws.J_hat(a, b);
    }
    const V half_kick = (0.5 * sqrt_h * s * draws.chi_hat1) * P.col(a);
    const V k1 = centre + half_kick + (sqrt_h * s) * (P * jhat_row);
    const V k2 = x - half_kick;
    const V c1 = m.sigma_column(k1, a);
    const V c2 = m.sigma_column(k2, a);
    inc += (sqrt_h * s * draws.R[a]) * (c1 + c2 - S0.col(a));
    inc += (2.0 * sqrt_h * s * draws.J_hat(a, a)) * (S0.col(a) - c2);
  }
  counters.sigma_columns += 2 * d;
  return inc;
}

}  // namespace detail

/**
 * @brief Increment Phi_h(x) - x of a weak order 2 integrator for dX = sigma Sigma(X) dW.
 *
 * `aux` holds X^(1) (Mod1) or X^(1), X^(2) (Mod2); it must be empty for Base.
 * For constant Sigma every kind and variant returns sqrt(h) sigma Sigma R.
 */
template <Dynamics M>
typename M::VecType noise_increment(NoiseMethodKind kind, const M& m, const typename M::VecType& x,
                                    std::span<const typename M::VecType> aux, double h,
                                    const NoiseDraws<M::dim>& draws, EvalCounters& counters) {
  if (aux.size() != aux_arity(kind.variant)) {
    throw UsageError("noise integrator variant expects " +
                     std::to_string(aux_arity(kind.variant)) + " auxiliary points, got " +
                     std::to_string(aux.size()));
  }
  if (!(h > 0.0)) {
    throw UsageError("step size must be positive");
  }
  if (kind.kind == NoiseKind::MT2) {
    return detail::mt2_increment(kind.variant, m, x, aux, h, draws, counters);
  }
  return detail::w2ito1_increment(kind.variant, m, x, aux, h, draws, counters);
}

}  // namespace pvd
