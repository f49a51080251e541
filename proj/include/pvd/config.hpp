#pragma once

#include "pvd/estimators.hpp"
#include "pvd/integrators.hpp"
#include "pvd/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace pvd {

/**
 * Flat `key = value` document. `#` starts a comment; blank lines are ignored.
 * Every key must be consumed by the schema, otherwise validation reports it.
 */
class KeyValueDocument {
 public:
  static KeyValueDocument parse(const std::string& text);
  static KeyValueDocument load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;
  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;

  /// Keys never read through the accessors above.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

struct TimeAverageMode {
  double T = 1.0;
  std::optional<std::uint64_t> burn_in;
  int replicates = 8;
};

struct EnsembleMode {
  double T = 30.0;
  int n_traj = 1000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  std::vector<MethodKind> methods;
  std::vector<double> h_list;  ///< descending
  std::variant<TimeAverageMode, EnsembleMode> mode = TimeAverageMode{};
  ObservableSpec observable;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::optional<Eigen::VectorXd> x0;
  int workers = 0;
};

/// Geometric step sizes 10^{-2 + k/10}, k = 0..20, in descending order.
std::vector<double> full_step_sizes();

/// Builds the problem from `potential`, `diffusion` and their parameters.
ProblemSpec problem_from_document(const KeyValueDocument& doc);

/// Parses and validates; throws UsageError with the offending key.
ExperimentConfig experiment_from_document(const KeyValueDocument& doc);
ExperimentConfig load_experiment(const std::filesystem::path& path);

}  // namespace pvd
