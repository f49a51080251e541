#pragma once

#include "pvd/integrators.hpp"
#include "pvd/model.hpp"
#include "pvd/quadrature.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pvd {

struct HistogramGrid {
  double lo = -5.0;
  double hi = 5.0;
  int bins = 30;

  double width() const { return (hi - lo) / bins; }
  /// Bin index for x in [lo, hi), -1 otherwise.
  int index(double x) const;
};

/// Weighted bin occupancy; `total` includes samples falling outside the grid.
class HistogramEstimator {
 public:
  explicit HistogramEstimator(HistogramGrid grid = {});

  void add(double x, double weight = 1.0);
  void merge(const HistogramEstimator& other);

  const HistogramGrid& grid() const { return grid_; }
  const std::vector<double>& counts() const { return counts_; }
  double total() const { return total_; }
  /// count_i / total; throws std::domain_error when empty.
  std::vector<double> frequencies() const;

 private:
  HistogramGrid grid_;
  std::vector<double> counts_;
  double total_ = 0.0;
};

/**
 * @brief Quadrature oracle for rho(x) proportional to exp(-(2 / sigma^2) V(x)).
 *
 * Built from the potential and sigma only: the invariant law does not depend
 * on the diffusion field, so the constructor has no access to it.
 */
class ReferenceOracle {
 public:
  ReferenceOracle(Potential potential, double sigma, int dimension);

  /// Per-coordinate log density (unnormalised) for separable potentials.
  double log_density_1d(double x) const;
  /// Normaliser of the one-dimensional (marginal) density over the real line.
  QuadratureResult normalizer() const;
  /// Bin masses of the 1D invariant law; requires d = 1.
  std::vector<double> bin_masses(const HistogramGrid& grid) const;
  /// E[sum_i x_i^2] under the invariant law.
  QuadratureResult square_norm() const;
  /// Truncated integration domain of the marginal density.
  std::pair<double, double> support() const { return support_; }

 private:
  /// Integral of exp(log_density_1d - log_peak) over the support.
  QuadratureResult shifted_normalizer() const;

  Potential potential_;
  double sigma_;
  int dimension_;
  bool separable_;
  double log_peak_ = 0.0;
  std::pair<double, double> support_{0.0, 0.0};
};

/// (1/M) sum_i |omega_i - omega_hat_i|.
double l1_bin_error(const HistogramEstimator& estimate, const std::vector<double>& bin_masses);

struct ConvergenceRecord {
  std::string method;
  double h = 0.0;
  double effective_h = 0.0;
  double error = 0.0;
  double std_error = 0.0;
  std::uint64_t n_force = 0;
  std::uint64_t n_sigma = 0;
  bool unstable = false;
};

/// Least-squares slope of log(error) against log(h) with weights 1/stderr^2
/// (unweighted when any stderr is zero). Uses records with finite error > stderr;
/// needs at least 3 distinct h.
double fit_slope(const std::vector<ConvergenceRecord>& records);

enum class ObservableKind { SquareNorm, L1Bins };

struct ObservableSpec {
  ObservableKind kind = ObservableKind::SquareNorm;
  HistogramGrid grid{};
};

struct ObservableEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  bool std_error_defined = true;
  bool unstable = false;
  std::uint64_t steps = 0;        ///< steps per trajectory / replicate
  std::uint64_t burn_in = 0;
  double effective_h = 0.0;       ///< h <dt/d tau> for lmt, h otherwise
  EvalCounters counters;          ///< counts of one trajectory / replicate
  /// L1Bins only: pooled histogram and per-block histograms.
  std::optional<HistogramEstimator> histogram;
  std::vector<HistogramEstimator> block_histograms;
};

/// ceil(T / h) with tolerance for T / h that is integral up to rounding.
std::uint64_t step_count(double T, double h);
/// min(1000, steps / 100).
std::uint64_t default_burn_in(std::uint64_t steps);

/// Default starting point: the origin, or e_1 for the ring potential.
Eigen::VectorXd default_initial_state(const ProblemSpec& spec);

struct EnsembleSettings {
  MethodKind method;
  double h = 0.01;
  double T = 1.0;
  int n_traj = 1;
  std::uint64_t seed = 0;
  ObservableSpec observable{};
  std::optional<Eigen::VectorXd> x0;
  int workers = 0;  ///< 0 selects the default worker count
};

/// Mean of phi(X-bar_N) (or phi(X_N)) over independent trajectories, N = step_count(T, h).
ObservableEstimate ensemble_observable(const ProblemSpec& problem, const EnsembleSettings& s);

struct TimeAverageSettings {
  MethodKind method;
  double h = 0.01;
  double T = 1.0;
  std::optional<std::uint64_t> burn_in;  ///< steps; default_burn_in when empty
  int replicates = 8;
  std::uint64_t seed = 0;
  ObservableSpec observable{};
  std::optional<Eigen::VectorXd> x0;
  int workers = 0;
};

/// Trajectory average of phi after burn-in, replicated; std_error across replicates.
ObservableEstimate time_average_observable(const ProblemSpec& problem,
                                           const TimeAverageSettings& s);

}  // namespace pvd
