#pragma once

#include "pvd/config.hpp"
#include "pvd/estimators.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace pvd {

/// Runs every (method, h) pair of the config and writes `cfg.out` when set.
/// Divergent runs are returned with `unstable` set instead of aborting the sweep.
std::vector<ConvergenceRecord> run_experiment(const ExperimentConfig& cfg,
                                              std::ostream* log = nullptr);

/// CSV: method,h,effective_h,error,stderr,n_force,n_sigma,seed,T,n_traj.
void write_records_csv(std::ostream& os, const ExperimentConfig& cfg,
                       const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_records_csv(std::istream& is);

/// Slope per method, in order of first appearance.
std::vector<std::pair<std::string, double>> slopes_by_method(
    const std::vector<ConvergenceRecord>& records);

struct ReferenceValue {
  double value = 0.0;               ///< square_norm: O; l1_bins: sum of bin masses
  double quadrature_error = 0.0;
  std::vector<double> bin_masses;   ///< l1_bins only
};

ReferenceValue run_reference(const ProblemSpec& problem, const ObservableSpec& observable);

/// x, V(x), Sigma(x) on a uniform grid for one-dimensional problems.
void write_problem_panel(std::ostream& os, const ProblemSpec& problem, double lo, double hi,
                         int points);

/// Worker count: PVD_WORKERS if set, else `configured` if positive, else hardware threads.
int resolve_workers(int configured);

}  // namespace pvd
