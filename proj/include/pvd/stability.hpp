#pragma once

#include "pvd/integrators.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace pvd {

/**
 * Scalar test problem dX = lambda X dt + mu X dW run with h = 1, so that
 * lambda = p and mu = q. Satisfies Dynamics, letting the stability analysis
 * drive the same step maps used for simulation.
 */
struct LinearTestDynamics {
  using VecType = Vec<1>;
  using MatType = Mat<1>;
  static constexpr int dim = 1;

  double lambda = 0.0;
  double mu = 0.0;

  int dimension() const { return 1; }
  double sigma() const { return 1.0; }
  DriftEval<1> drift(const VecType& x) const {
    DriftEval<1> out;
    out.f = lambda * x;
    out.gradient_term = out.f;
    out.divergence_term = VecType::Zero();
    return out;
  }
  MatType sigma_matrix(const VecType& x) const { return MatType::Constant(mu * x[0]); }
  VecType sigma_column(const VecType& x, int) const { return mu * x; }
};

/// Entries of the 2x2 map (X_n, X-bar_{n-1}) -> (X_{n+1}, X-bar_n); R22 = 0.
struct StabilityEntries {
  double r11 = 0.0;
  double r12 = 0.0;
  double r21 = 0.0;
};

/// R-hat(q, R) = q R + q^2 (R^2 - 1) / 2, shared by both noise integrators in d = 1.
double noise_stability_increment(double q, double R);

/// Closed form for PVD2; other post-processed schemes are linearised through their step maps.
/// `signs` supplies the Rademacher variables; its R is overwritten by `R`.
StabilityEntries stability_entries(const MethodKind& method, double p, double q, double R,
                                   const NoiseDraws<1>& signs = zero_draws<1>(1));

/// Step-map linearisation, valid for every post-processed scheme (used as a cross-check for PVD2).
StabilityEntries linearised_entries(const MethodKind& method, double p, double q, double R,
                                    const NoiseDraws<1>& signs);

using MomentMatrix = Eigen::Matrix3d;

/// Propagator of (E X_n^2, E X-bar_{n-1}^2, E X_n X-bar_{n-1}); expectations by
/// Gauss-Hermite in R and exact sums over the Rademacher signs.
MomentMatrix moment_matrix(const MethodKind& method, double p, double q, int gauss_nodes = 8);

/// Roots of det(m - lambda I) from the closed-form cubic, Newton-polished.
std::array<std::complex<double>, 3> characteristic_roots(const MomentMatrix& m);
/// Largest root modulus; falls back to an eigensolver if a root fails the
/// residual check |det(m - r I)| < 1e-9 max(1, max|m_ij|)^3.
double spectral_radius(const MomentMatrix& m);

/// Mean-square stability of the exact solution for real p, q: p + q^2/2 < 0.
inline bool exact_stable(double p, double q2) { return p + 0.5 * q2 < 0.0; }

struct RegionScan {
  std::vector<double> p;
  std::vector<double> q2;
  std::vector<double> rho;  ///< row-major over (q2, p)
  bool stable(std::size_t iq, std::size_t ip) const { return rho[iq * p.size() + ip] < 1.0; }
};

/// Evenly spaced grid including both endpoints.
std::vector<double> linspace(double lo, double hi, int n);

RegionScan scan_region(const MethodKind& method, const std::vector<double>& p_grid,
                       const std::vector<double>& q2_grid, int workers = 0);

/// CSV with columns p, q2, rho, stable, exact_stable.
void write_region_csv(std::ostream& os, const RegionScan& scan);

/// Monte Carlo E[X_n^2] after `steps` steps from X_0 = 1 on the test problem.
double empirical_second_moment(const MethodKind& method, double p, double q, int n_traj,
                               int steps, std::uint64_t seed);

}  // namespace pvd
