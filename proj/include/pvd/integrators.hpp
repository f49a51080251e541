#pragma once

#include "pvd/dynamics.hpp"
#include "pvd/noise_integrators.hpp"
#include "pvd/rng.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace pvd {

enum class Scheme { EM, LMd, LMt, RK4Strang, PVD2, PVD2Markov, PVD2Mod1, PVD2Mod2 };

struct MethodKind {
  Scheme scheme = Scheme::PVD2;
  NoiseKind noise = NoiseKind::W2Ito1;  ///< ignored by EM, LMd and LMt

  NoiseMethodKind noise_method() const;
  /// Observables are taken on the post-processed point X-bar.
  bool post_processed() const;
  /// The step consumes R_{n+1} as well as R_n.
  bool uses_next_gaussian() const;
  bool operator==(const MethodKind&) const = default;
};

/// Accepts "em", "lmd", "lmt", "rk4_<noise>", "pvd2_<noise>", "pvd2_markov_<noise>",
/// "pvd2_mod1_<noise>", "pvd2_mod2_<noise>" with <noise> in {w2ito1, mt2}.
MethodKind parse_method(const std::string& name);
std::string method_name(const MethodKind& kind);

/// Drift evaluations per step after initialization.
int force_evaluations_per_step(const MethodKind& kind);
/// Drift evaluations made once at initialization (the X-bar_{-1} = X_0 warm-up).
int force_evaluations_at_init(const MethodKind& kind);
/// Sigma tensor evaluations per step, excluding the post-processor's Sigma(X_n).
int sigma_evaluations_per_step(const MethodKind& kind);

/// Non-empty when the scheme is known to be inconsistent for this problem.
std::optional<std::string> consistency_warning(const MethodKind& kind, int dimension);

template <int Dim>
struct MethodState {
  Vec<Dim> x;             ///< X_n
  Vec<Dim> xbar;          ///< post-processed point of the last step's starting state
  Vec<Dim> lagged_force;  ///< F(X-bar_{n-1})
  bool lagged_ready = false;
  /// Point and weight representing the last step in time averages.
  Vec<Dim> sample;
  double sample_weight = 1.0;
  EvalCounters counters;
};

namespace detail {

template <Dynamics M>
typename M::VecType counted_drift(const M& m, const typename M::VecType& x, EvalCounters& c) {
  ++c.force;
  return m.drift(x).f;
}

template <Dynamics M>
typename M::MatType counted_sigma(const M& m, const typename M::VecType& x, EvalCounters& c) {
  c.sigma_columns += m.dimension();
  return m.sigma_matrix(x);
}

template <Dynamics M>
typename M::VecType rk4_flow(const M& m, const typename M::VecType& x, double dt,
                             EvalCounters& c) {
  using V = typename M::VecType;
  const V k1 = counted_drift(m, x, c);
  const V k2 = counted_drift(m, V(x + (0.5 * dt) * k1), c);
  const V k3 = counted_drift(m, V(x + (0.5 * dt) * k2), c);
  const V k4 = counted_drift(m, V(x + dt * k3), c);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// X-bar = x + (1/2) sqrt(h) sigma Sigma(x) R.
template <Dynamics M>
typename M::VecType postprocess(const M& m, const typename M::VecType& x, double h,
                                const NoiseDraws<M::dim>& draws, EvalCounters& counters) {
  ++counters.postprocess_sigma;
  return x + (0.5 * std::sqrt(h) * m.sigma()) * (m.sigma_matrix(x) * draws.R);
}

template <Dynamics M>
void em_step(const M& m, MethodState<M::dim>& st, double h, const NoiseDraws<M::dim>& draws) {
  st.sample = st.x;
  const auto f = detail::counted_drift(m, st.x, st.counters);
  const auto S = detail::counted_sigma(m, st.x, st.counters);
  st.x += h * f + (std::sqrt(h) * m.sigma()) * (S * draws.R);
}

/// Drift-corrected Leimkuhler-Matthews with a = 1/4; consistent for d = 1 only.
template <Dynamics M>
void lmd_step(const M& m, MethodState<M::dim>& st, double h, const NoiseDraws<M::dim>& draws,
              const Vec<M::dim>& next_gaussian) {
  st.sample = st.x;
  ++st.counters.force;
  const DriftEval<M::dim> f = m.drift(st.x);
  const auto S = detail::counted_sigma(m, st.x, st.counters);
  st.x += h * f.f + (0.25 * h) * f.divergence_term +
          (0.5 * std::sqrt(h) * m.sigma()) * (S * (draws.R + next_gaussian));
}

/**
 * Leimkuhler-Matthews on the time-changed process d tau = g(X)^2 dt, which has
 * additive noise and potential V - sigma^2 ln g. The step size h is in tau;
 * `sample_weight` receives dt/d tau = 1/g(X_n)^2.
 */
template <GradientDynamics M>
void lmt_step(const M& m, MethodState<M::dim>& st, double h, const NoiseDraws<M::dim>& draws,
              const Vec<M::dim>& next_gaussian) {
  if (m.dimension() != 1) {
    throw UsageError("lmt requires a one-dimensional isotropic diffusion");
  }
  st.sample = st.x;
  const double g = m.isotropic_factor(st.x);
  ++st.counters.sigma_columns;
  ++st.counters.force;
  const double s2 = m.sigma() * m.sigma();
  const auto grad_rescaled = m.grad_potential(st.x) - (s2 / (2.0 * g * g)) * m.div_D(st.x);
  st.sample_weight = 1.0 / (g * g);
  st.x += -h * grad_rescaled + (0.5 * std::sqrt(h) * m.sigma()) * (draws.R + next_gaussian);
}

/// Half-step RK4 on dx/dt = F, full noise step, half-step RK4.
template <Dynamics M>
void rk4_strang_step(const M& m, MethodState<M::dim>& st, double h, NoiseKind noise,
                     const NoiseDraws<M::dim>& draws) {
  using V = typename M::VecType;
  st.sample = st.x;
  V y = detail::rk4_flow(m, st.x, 0.5 * h, st.counters);
  y += noise_increment<M>({noise, NoiseVariant::Base}, m, y, {}, h, draws, st.counters);
  st.x = detail::rk4_flow(m, y, 0.5 * h, st.counters);
}

/// Sets the lagged force to F(X_0) (X-bar_{-1} = X_0).
template <Dynamics M>
void pvd2_initialize(const M& m, MethodState<M::dim>& st) {
  st.lagged_force = detail::counted_drift(m, st.x, st.counters);
  st.lagged_ready = true;
}

/**
 * @brief One step of the post-processed scheme and its variants.
 *
 *   X-bar_n = X_n + (1/2) sqrt(h) sigma Sigma(X_n) R_n
 *   X_{n+1} = X_n + h F(X-bar_n) + noise increment
 *
 * PVD2 evaluates the noise integrator at X_n + (h/4) F(X-bar_{n-1}); PVD2Markov
 * at X_n + (h/4) F(X_n); Mod1 and Mod2 pass X_n plus the auxiliary points
 * X^(1) = X_n + (h/4) F(X-bar_{n-1}) and X^(2) = X_n + (h/2) F(X-bar_n).
 */
template <Dynamics M>
void pvd2_step(const M& m, MethodState<M::dim>& st, double h, Scheme scheme, NoiseKind noise,
               const NoiseDraws<M::dim>& draws) {
  using V = typename M::VecType;
  if (scheme != Scheme::PVD2Markov && !st.lagged_ready) {
    pvd2_initialize(m, st);
  }
  st.xbar = postprocess(m, st.x, h, draws, st.counters);
  st.sample = st.xbar;
  const V fbar = detail::counted_drift(m, st.xbar, st.counters);

  V inc;
  switch (scheme) {
    case Scheme::PVD2: {
      const V y = st.x + (0.25 * h) * st.lagged_force;
      inc = noise_increment<M>({noise, NoiseVariant::Base}, m, y, {}, h, draws, st.counters);
      break;
    }
    case Scheme::PVD2Markov: {
      const V fx = detail::counted_drift(m, st.x, st.counters);
      const V y = st.x + (0.25 * h) * fx;
      inc = noise_increment<M>({noise, NoiseVariant::Base}, m, y, {}, h, draws, st.counters);
      break;
    }
    case Scheme::PVD2Mod1: {
      const std::array<V, 1> aux{V(st.x + (0.25 * h) * st.lagged_force)};
      inc = noise_increment<M>({noise, NoiseVariant::Mod1}, m, st.x, aux, h, draws, st.counters);
      break;
    }
    case Scheme::PVD2Mod2: {
      const std::array<V, 2> aux{V(st.x + (0.25 * h) * st.lagged_force),
                                 V(st.x + (0.5 * h) * fbar)};
      inc = noise_increment<M>({noise, NoiseVariant::Mod2}, m, st.x, aux, h, draws, st.counters);
      break;
    }
    default:
      throw UsageError("pvd2_step called with a non post-processed scheme");
  }
  st.x += h * fbar + inc;
  st.lagged_force = fbar;
  st.lagged_ready = true;
}

/// Resets the state to x0 and performs any warm-up evaluations.
template <Dynamics M>
void initialize(const MethodKind& kind, const M& m, MethodState<M::dim>& st,
                const typename M::VecType& x0) {
  if (x0.size() != m.dimension()) {
    throw UsageError("initial state has wrong dimension");
  }
  st = MethodState<M::dim>{};
  st.x = x0;
  st.xbar = x0;
  st.sample = x0;
  if (kind.scheme == Scheme::LMt) {
    if constexpr (!GradientDynamics<M>) {
      throw UsageError("lmt needs potential-gradient dynamics");
    } else if (m.dimension() != 1) {
      throw UsageError("lmt requires a one-dimensional isotropic diffusion");
    } else {
      (void)m.isotropic_factor(x0);  // throws for anisotropic fields
    }
  }
  if (kind.post_processed() && kind.scheme != Scheme::PVD2Markov) {
    pvd2_initialize(m, st);
  }
}

/// Advances one step. `next_gaussian` must be R_{n+1} when kind.uses_next_gaussian().
template <Dynamics M>
void step(const MethodKind& kind, const M& m, MethodState<M::dim>& st, double h,
          const NoiseDraws<M::dim>& draws, const Vec<M::dim>* next_gaussian = nullptr) {
  if (kind.uses_next_gaussian() && next_gaussian == nullptr) {
    throw UsageError(method_name(kind) + " requires the next step's Gaussian");
  }
  switch (kind.scheme) {
    case Scheme::EM:
      em_step(m, st, h, draws);
      return;
    case Scheme::LMd:
      lmd_step(m, st, h, draws, *next_gaussian);
      return;
    case Scheme::LMt:
      if constexpr (GradientDynamics<M>) {
        lmt_step(m, st, h, draws, *next_gaussian);
        return;
      } else {
        throw UsageError("lmt needs potential-gradient dynamics");
      }
    case Scheme::RK4Strang:
      rk4_strang_step(m, st, h, kind.noise, draws);
      return;
    case Scheme::PVD2:
    case Scheme::PVD2Markov:
    case Scheme::PVD2Mod1:
    case Scheme::PVD2Mod2:
      pvd2_step(m, st, h, kind.scheme, kind.noise, draws);
      return;
  }
}

}  // namespace pvd
