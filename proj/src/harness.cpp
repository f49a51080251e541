#include "pvd/harness.hpp"

#include "pvd/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pvd {

namespace {

constexpr const char* kUnstable = "unstable";
constexpr const char* kHeader = "method,h,effective_h,error,stderr,n_force,n_sigma,seed,T,n_traj";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double l1_std_error(const std::vector<HistogramEstimator>& blocks,
                    const std::vector<double>& masses) {
  std::vector<double> errors;
  for (const auto& b : blocks) {
    if (b.total() > 0.0) {
      errors.push_back(l1_bin_error(b, masses));
    }
  }
  if (errors.size() < 2) {
    return 0.0;
  }
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= static_cast<double>(errors.size());
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  const double n = static_cast<double>(errors.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

int resolve_workers(int configured) {
  if (const char* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') {
    return default_workers();
  }
  return configured > 0 ? configured : default_workers();
}

ReferenceValue run_reference(const ProblemSpec& problem, const ObservableSpec& observable) {
  validate(problem);
  const ReferenceOracle oracle(problem.potential, problem.sigma, problem.dimension);
  ReferenceValue out;
  if (observable.kind == ObservableKind::SquareNorm) {
    const auto r = oracle.square_norm();
    out.value = r.value;
    out.quadrature_error = r.error;
    return out;
  }
  if (problem.dimension != 1) {
    throw UsageError("l1_bins reference requires a one-dimensional problem");
  }
  out.bin_masses = oracle.bin_masses(observable.grid);
  for (double m : out.bin_masses) out.value += m;
  const auto z = oracle.normalizer();
  out.quadrature_error = z.error / z.value;
  return out;
}

std::vector<ConvergenceRecord> run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  const ReferenceValue reference = run_reference(cfg.problem, cfg.observable);
  const int workers = resolve_workers(cfg.workers);
  for (const auto& method : cfg.methods) {
    if (const auto warning = consistency_warning(method, cfg.problem.dimension); warning && log) {
      *log << *warning << '\n';
    }
  }

  std::vector<ConvergenceRecord> records;
  for (const auto& method : cfg.methods) {
    for (double h : cfg.h_list) {
      ObservableEstimate est;
      if (const auto* ta = std::get_if<TimeAverageMode>(&cfg.mode)) {
        TimeAverageSettings s;
        s.method = method;
        s.h = h;
        s.T = ta->T;
        s.burn_in = ta->burn_in;
        s.replicates = ta->replicates;
        s.seed = cfg.seed;
        s.observable = cfg.observable;
        s.x0 = cfg.x0;
        s.workers = workers;
        est = time_average_observable(cfg.problem, s);
      } else {
        const auto& en = std::get<EnsembleMode>(cfg.mode);
        EnsembleSettings s;
        s.method = method;
        s.h = h;
        s.T = en.T;
        s.n_traj = en.n_traj;
        s.seed = cfg.seed;
        s.observable = cfg.observable;
        s.x0 = cfg.x0;
        s.workers = workers;
        est = ensemble_observable(cfg.problem, s);
      }

      ConvergenceRecord rec;
      rec.method = method_name(method);
      rec.h = h;
      rec.effective_h = est.effective_h;
      rec.n_force = est.counters.force;
      rec.n_sigma = est.counters.sigma_evaluations(cfg.problem.dimension);
      rec.unstable = est.unstable;
      if (est.unstable) {
        rec.error = std::numeric_limits<double>::quiet_NaN();
        rec.std_error = std::numeric_limits<double>::quiet_NaN();
      } else if (cfg.observable.kind == ObservableKind::SquareNorm) {
        rec.error = std::abs(est.mean - reference.value);
        rec.std_error = est.std_error;
      } else {
        rec.error = l1_bin_error(*est.histogram, reference.bin_masses);
        rec.std_error = l1_std_error(est.block_histograms, reference.bin_masses);
      }
      if (log) {
        *log << cfg.name << ' ' << rec.method << " h=" << h << ' '
             << (rec.unstable ? std::string(kUnstable)
                              : "error=" + std::to_string(rec.error) +
                                    " stderr=" + std::to_string(rec.std_error))
             << '\n';
      }
      records.push_back(rec);
    }
  }

  if (!cfg.out.empty()) {
    std::ofstream os(cfg.out);
    if (!os) {
      throw std::runtime_error("cannot write results to '" + cfg.out.string() + "'");
    }
    write_records_csv(os, cfg, records);
    if (!os) {
      throw std::runtime_error("failed while writing '" + cfg.out.string() + "'");
    }
  }
  return records;
}

void write_records_csv(std::ostream& os, const ExperimentConfig& cfg,
                       const std::vector<ConvergenceRecord>& records) {
  const double T = std::visit([](const auto& m) { return m.T; }, cfg.mode);
  int n_traj = 0;
  if (const auto* ta = std::get_if<TimeAverageMode>(&cfg.mode)) {
    n_traj = ta->replicates;
  } else {
    n_traj = std::get<EnsembleMode>(cfg.mode).n_traj;
  }
  os << kHeader << '\n';
  os << std::setprecision(17);
  for (const auto& r : records) {
    const double T_actual = static_cast<double>(step_count(T, r.h)) * r.h;
    os << r.method << ',' << r.h << ',' << r.effective_h << ',';
    if (r.unstable) {
      os << kUnstable << ',' << kUnstable;
    } else {
      os << r.error << ',' << r.std_error;
    }
    os << ',' << r.n_force << ',' << r.n_sigma << ',' << cfg.seed << ',' << T_actual << ','
       << n_traj << '\n';
  }
}

std::vector<ConvergenceRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw UsageError("results CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw UsageError("results CSV header does not match '" + std::string(kHeader) + "'");
  }
  std::vector<ConvergenceRecord> out;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 10) {
      throw UsageError("results CSV row " + std::to_string(row) + ": expected 10 columns");
    }
    try {
      ConvergenceRecord r;
      r.method = cells[0];
      r.h = std::stod(cells[1]);
      r.effective_h = std::stod(cells[2]);
      r.unstable = cells[3] == kUnstable;
      r.error = r.unstable ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[3]);
      r.std_error = r.unstable ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[4]);
      r.n_force = std::stoull(cells[5]);
      r.n_sigma = std::stoull(cells[6]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw UsageError("results CSV row " + std::to_string(row) + ": malformed number");
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> slopes_by_method(
    const std::vector<ConvergenceRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<ConvergenceRecord>> grouped;
  for (const auto& r : records) {
    if (!grouped.count(r.method)) order.push_back(r.method);
    grouped[r.method].push_back(r);
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& name : order) {
    out.emplace_back(name, fit_slope(grouped[name]));
  }
  return out;
}

void write_problem_panel(std::ostream& os, const ProblemSpec& problem, double lo, double hi,
                         int points) {
  if (problem.dimension != 1) {
    throw UsageError("problem panels are only available for one-dimensional problems");
  }
  if (points < 2 || !(hi > lo)) {
    throw UsageError("panel needs points >= 2 and hi > lo");
  }
  const Model<1> model(problem);
  os << "x,V,Sigma\n" << std::setprecision(17);
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const Vec<1> v = Vec<1>::Constant(x);
    os << x << ',' << model.potential(v) << ',' << model.sigma_matrix(v)(0, 0) << '\n';
  }
}

}  // namespace pvd
