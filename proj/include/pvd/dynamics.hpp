#pragma once

#include "pvd/model.hpp"

#include <concepts>
#include <cstdint>

namespace pvd {

/// Anything the integrators can step: a drift F and a symmetric noise field Sigma.
template <class M>
concept Dynamics = requires(const M& m, const typename M::VecType& x, int a) {
  typename M::MatType;
  { M::dim } -> std::convertible_to<int>;
  { m.dimension() } -> std::convertible_to<int>;
  { m.sigma() } -> std::convertible_to<double>;
  { m.drift(x) } -> std::same_as<DriftEval<M::dim>>;
  { m.sigma_matrix(x) } -> std::convertible_to<typename M::MatType>;
  { m.sigma_column(x, a) } -> std::convertible_to<typename M::VecType>;
};

/// Dynamics that also expose V and the isotropic factor g (needed by the time-rescaled scheme).
template <class M>
concept GradientDynamics = Dynamics<M> && requires(const M& m, const typename M::VecType& x) {
  { m.grad_potential(x) } -> std::convertible_to<typename M::VecType>;
  { m.div_D(x) } -> std::convertible_to<typename M::VecType>;
  { m.isotropic_factor(x) } -> std::convertible_to<double>;
};

/**
 * Evaluation tallies. Sigma work is counted in single columns so that a full
 * Sigma(x) costs d columns and d column evaluations at distinct points also
 * count as one tensor evaluation.
 */
struct EvalCounters {
  std::uint64_t force = 0;
  std::uint64_t sigma_columns = 0;
  /// Sigma(X_n) evaluations made only to form the post-processed point.
  std::uint64_t postprocess_sigma = 0;

  std::uint64_t sigma_evaluations(int d) const { return sigma_columns / static_cast<std::uint64_t>(d); }

  EvalCounters& operator+=(const EvalCounters& o) {
    force += o.force;
    sigma_columns += o.sigma_columns;
    postprocess_sigma += o.postprocess_sigma;
    return *this;
  }
  bool operator==(const EvalCounters&) const = default;
};

}  // namespace pvd
