#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace pvd {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< sum of local Richardson error estimates
};

/**
 * @brief Adaptive Simpson rule on [a, b].
 *
 * The interval is first split into `panels` pieces; each piece is refined
 * until the local Simpson difference meets its share of rel_tol * |I|.
 */
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-10, int panels = 64, int max_depth = 40);

/// Interval around the maximiser of log_f outside of which log_f < max - ln(1 / cutoff).
/// The search starts on [lo, hi] and expands outwards; lo may be a hard boundary.
std::pair<double, double> truncation_interval(const std::function<double(double)>& log_f,
                                              double lo, double hi, double cutoff = 1e-16,
                                              bool hard_lower = false);

/// Nodes and weights for E[f(Z)], Z ~ N(0, 1); exact for polynomials of degree <= 2n - 1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

}  // namespace pvd
