#include "pvd/estimators.hpp"

#include "pvd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace pvd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kQuadWellShift = 17.0 / 16.0;
constexpr double kRelTol = 1e-10;
constexpr int kBlocks = 10;

double potential_1d(const Potential& potential, double x) {
  return std::visit(overloaded{
                        [x](const Quadratic&) { return 0.5 * x * x; },
                        [x](const Quartic&) { return 0.25 * x * x * x * x; },
                        [x](const DoubleWell&) { return 0.5 * x * x + std::sin(1.0 + 3.0 * x); },
                        [x](const QuadrupleWell&) {
                          return std::sqrt(kQuadWellShift - 2.0 * x * x + x * x * x * x);
                        },
                        [](const Ring&) -> double {
                          throw UsageError("ring potential is not separable");
                        },
                    },
                    potential);
}

double mean_and_std_error(const std::vector<double>& values, double& std_error) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) {
    std_error = 0.0;
    return mean;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  std_error = std::sqrt(ss / (n - 1.0) / n);
  return mean;
}

double observe(const ObservableSpec& obs, const auto& x) {
  (void)obs;
  return x.squaredNorm();
}

template <int Dim>
struct ReplicateOutcome {
  double weighted_sum = 0.0;
  double weight_total = 0.0;
  std::uint64_t samples = 0;
  std::optional<HistogramEstimator> histogram;
  EvalCounters counters;
  bool unstable = false;
};

template <int Dim>
ReplicateOutcome<Dim> run_replicate(const Model<Dim>& m, const MethodKind& kind, double h,
                                    std::uint64_t steps, std::uint64_t burn_in,
                                    std::uint64_t seed, std::uint64_t replicate,
                                    const Vec<Dim>& x0, const ObservableSpec& obs) {
  const int d = m.dimension();
  ReplicateOutcome<Dim> out;
  if (obs.kind == ObservableKind::L1Bins) {
    out.histogram.emplace(obs.grid);
  }
  MethodState<Dim> st;
  initialize(kind, m, st, x0);
  NoiseDraws<Dim> now = draw<Dim>({seed, replicate, 0}, d);
  for (std::uint64_t n = 0; n < steps; ++n) {
    NoiseDraws<Dim> next = draw<Dim>({seed, replicate, n + 1}, d);
    step(kind, m, st, h, now, &next.R);
    if (!st.x.allFinite() || !st.sample.allFinite()) {
      out.unstable = true;
      break;
    }
    if (n >= burn_in) {
      const double w = st.sample_weight;
      out.weight_total += w;
      ++out.samples;
      if (out.histogram) {
        out.histogram->add(st.sample[0], w);
      } else {
        out.weighted_sum += w * observe(obs, st.sample);
      }
    }
    now = std::move(next);
  }
  out.counters = st.counters;
  return out;
}

template <int Dim>
struct EndpointOutcome {
  Vec<Dim> point;
  EvalCounters counters;
  bool unstable = false;
};

template <int Dim>
EndpointOutcome<Dim> run_to_endpoint(const Model<Dim>& m, const MethodKind& kind, double h,
                                     std::uint64_t steps, std::uint64_t seed,
                                     std::uint64_t trajectory, const Vec<Dim>& x0) {
  const int d = m.dimension();
  EndpointOutcome<Dim> out;
  MethodState<Dim> st;
  initialize(kind, m, st, x0);
  NoiseDraws<Dim> now = draw<Dim>({seed, trajectory, 0}, d);
  for (std::uint64_t n = 0; n < steps; ++n) {
    NoiseDraws<Dim> next = draw<Dim>({seed, trajectory, n + 1}, d);
    step(kind, m, st, h, now, &next.R);
    if (!st.x.allFinite()) {
      out.unstable = true;
      out.point = st.x;
      out.counters = st.counters;
      return out;
    }
    now = std::move(next);
  }
  // `now` holds R_N, the draw the post-processor shares with step N.
  out.point = kind.post_processed() ? postprocess(m, st.x, h, now, st.counters) : st.x;
  out.unstable = !out.point.allFinite();
  out.counters = st.counters;
  return out;
}

template <int Dim>
Vec<Dim> to_state(const std::optional<Eigen::VectorXd>& x0, const ProblemSpec& spec) {
  const Eigen::VectorXd v = x0 ? *x0 : default_initial_state(spec);
  if (v.size() != spec.dimension) {
    throw UsageError("initial state has dimension " + std::to_string(v.size()) + ", expected " +
                     std::to_string(spec.dimension));
  }
  return Vec<Dim>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Histogram
// ---------------------------------------------------------------------------

int HistogramGrid::index(double x) const {
  if (!(x >= lo) || !(x < hi)) {
    return -1;
  }
  const int i = static_cast<int>(std::floor((x - lo) * bins / (hi - lo)));
  return std::min(i, bins - 1);
}

HistogramEstimator::HistogramEstimator(HistogramGrid grid)
    : grid_(grid), counts_(static_cast<std::size_t>(grid.bins), 0.0) {
  if (grid.bins < 1 || !(grid.hi > grid.lo)) {
    throw UsageError("histogram grid needs bins >= 1 and hi > lo");
  }
}

void HistogramEstimator::add(double x, double weight) {
  total_ += weight;
  if (const int i = grid_.index(x); i >= 0) {
    counts_[static_cast<std::size_t>(i)] += weight;
  }
}

void HistogramEstimator::merge(const HistogramEstimator& other) {
  if (other.grid_.lo != grid_.lo || other.grid_.hi != grid_.hi ||
      other.grid_.bins != grid_.bins) {
    throw UsageError("cannot merge histograms on different grids");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] += other.counts_[i];
  }
  total_ += other.total_;
}

std::vector<double> HistogramEstimator::frequencies() const {
  if (!(total_ > 0.0)) {
    throw std::domain_error("histogram has no samples");
  }
  std::vector<double> out(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    out[i] = counts_[i] / total_;
  }
  return out;
}

double l1_bin_error(const HistogramEstimator& estimate, const std::vector<double>& bin_masses) {
  if (bin_masses.size() != estimate.counts().size()) {
    throw UsageError("oracle bin masses do not match the histogram grid");
  }
  const auto freq = estimate.frequencies();
  double sum = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    sum += std::abs(bin_masses[i] - freq[i]);
  }
  return sum / static_cast<double>(freq.size());
}

// ---------------------------------------------------------------------------
// Reference oracle
// ---------------------------------------------------------------------------

ReferenceOracle::ReferenceOracle(Potential potential, double sigma, int dimension)
    : potential_(std::move(potential)), sigma_(sigma), dimension_(dimension) {
  if (!(sigma_ > 0.0) || dimension_ < 1) {
    throw UsageError("oracle needs sigma > 0 and dimension >= 1");
  }
  separable_ = !std::holds_alternative<Ring>(potential_);
  const auto log_f = [this](double x) { return log_density_1d(x); };
  if (separable_) {
    support_ = truncation_interval(log_f, -20.0, 20.0);
  } else {
    support_ = truncation_interval(log_f, 0.0, 4.0, 1e-16, true);
  }
  log_peak_ = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4000; ++i) {
    const double x = support_.first + (support_.second - support_.first) * i / 4000.0;
    log_peak_ = std::max(log_peak_, log_density_1d(x));
  }
}

double ReferenceOracle::log_density_1d(double x) const {
  const double beta = 2.0 / (sigma_ * sigma_);
  if (separable_) {
    return -beta * potential_1d(potential_, x);
  }
  // Radial density of the ring: r^{d-1} exp(-beta k (1 - r)^2 / 2).
  if (x <= 0.0) {
    return dimension_ == 1 ? -beta * 0.5 * std::get<Ring>(potential_).k
                           : -std::numeric_limits<double>::infinity();
  }
  const double gap = 1.0 - x;
  return (dimension_ - 1) * std::log(x) - beta * 0.5 * std::get<Ring>(potential_).k * gap * gap;
}

QuadratureResult ReferenceOracle::shifted_normalizer() const {
  const auto f = [this](double x) { return std::exp(log_density_1d(x) - log_peak_); };
  return adaptive_simpson(f, support_.first, support_.second, kRelTol);
}

QuadratureResult ReferenceOracle::normalizer() const {
  const auto z = shifted_normalizer();
  const double scale = std::exp(log_peak_);
  return {z.value * scale, z.error * scale};
}

std::vector<double> ReferenceOracle::bin_masses(const HistogramGrid& grid) const {
  if (dimension_ != 1 || !separable_) {
    throw UsageError("bin masses are only defined for one-dimensional problems");
  }
  const auto f = [this](double x) { return std::exp(log_density_1d(x) - log_peak_); };
  const double z = shifted_normalizer().value;
  std::vector<double> masses(static_cast<std::size_t>(grid.bins));
  for (int i = 0; i < grid.bins; ++i) {
    const double a = grid.lo + grid.width() * i;
    const double b = i + 1 == grid.bins ? grid.hi : grid.lo + grid.width() * (i + 1);
    masses[static_cast<std::size_t>(i)] = adaptive_simpson(f, a, b, kRelTol, 8).value / z;
  }
  return masses;
}

QuadratureResult ReferenceOracle::square_norm() const {
  const auto [a, b] = support_;
  if (separable_) {
    const auto f = [this](double x) { return std::exp(log_density_1d(x) - log_peak_); };
    const auto fx2 = [&f](double x) { return x * x * f(x); };
    const auto z = adaptive_simpson(f, a, b, kRelTol);
    const auto m2 = adaptive_simpson(fx2, a, b, kRelTol);
    const double value = m2.value / z.value;
    const double err = std::abs(value) * (m2.error / std::abs(m2.value) + z.error / z.value);
    return {dimension_ * value, dimension_ * err};
  }
  // Ring: ratio of the radial moments r^{d+1} and r^{d-1}.
  const auto f = [this](double r) { return std::exp(log_density_1d(r) - log_peak_); };
  const auto fr2 = [&f](double r) { return r * r * f(r); };
  // r^2 shifts the peak outward; widen the upper limit accordingly.
  const double upper = b + 1.0;
  const auto z = adaptive_simpson(f, a, upper, kRelTol);
  const auto m2 = adaptive_simpson(fr2, a, upper, kRelTol);
  const double value = m2.value / z.value;
  return {value, std::abs(value) * (m2.error / m2.value + z.error / z.value)};
}

// ---------------------------------------------------------------------------
// Slope fitting
// ---------------------------------------------------------------------------

double fit_slope(const std::vector<ConvergenceRecord>& records) {
  std::map<double, const ConvergenceRecord*> usable;
  for (const auto& r : records) {
    if (!r.unstable && r.h > 0.0 && std::isfinite(r.error) && r.error > 0.0 &&
        r.error > r.std_error) {
      usable.emplace(r.h, &r);
    }
  }
  if (usable.size() < 3) {
    throw UsageError("fit_slope needs at least 3 records with distinct h and error > stderr");
  }
  const bool weighted = std::all_of(usable.begin(), usable.end(),
                                    [](const auto& kv) { return kv.second->std_error > 0.0; });
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [h, r] : usable) {
    const double w = weighted ? 1.0 / (r->std_error * r->std_error) : 1.0;
    const double x = std::log(h);
    const double y = std::log(r->error);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double denom = sw * sxx - sx * sx;
  return (sw * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------------------
// Simulation drivers
// ---------------------------------------------------------------------------

std::uint64_t step_count(double T, double h) {
  if (!(T > 0.0) || !(h > 0.0)) {
    throw UsageError("T and h must be positive");
  }
  const double ratio = T / h;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::uint64_t>(std::max(1.0, nearest));
  }
  return static_cast<std::uint64_t>(std::ceil(ratio));
}

std::uint64_t default_burn_in(std::uint64_t steps) {
  return std::min<std::uint64_t>(1000, steps / 100);
}

Eigen::VectorXd default_initial_state(const ProblemSpec& spec) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(spec.dimension);
  if (std::holds_alternative<Ring>(spec.potential)) {
    x0[0] = 1.0;
  }
  return x0;
}

ObservableEstimate ensemble_observable(const ProblemSpec& problem, const EnsembleSettings& s) {
  if (s.n_traj < 1) {
    throw UsageError("n_traj must be >= 1");
  }
  if (s.method.scheme == Scheme::LMt) {
    throw UsageError("lmt runs in rescaled time and has no fixed-time ensemble estimate");
  }
  if (s.observable.kind == ObservableKind::L1Bins && problem.dimension != 1) {
    throw UsageError("l1_bins requires a one-dimensional problem");
  }
  return with_model(problem, [&](const auto& model) {
    using M = std::decay_t<decltype(model)>;
    constexpr int Dim = M::dim;
    const Vec<Dim> x0 = to_state<Dim>(s.x0, problem);
    const std::uint64_t steps = step_count(s.T, s.h);
    std::vector<EndpointOutcome<Dim>> outcomes(static_cast<std::size_t>(s.n_traj));
    parallel_for(outcomes.size(), s.workers, [&](std::size_t i) {
      outcomes[i] = run_to_endpoint(model, s.method, s.h, steps, s.seed, i, x0);
    });

    ObservableEstimate est;
    est.steps = steps;
    est.effective_h = s.h;
    est.counters = outcomes.front().counters;
    est.unstable = std::any_of(outcomes.begin(), outcomes.end(),
                               [](const auto& o) { return o.unstable; });
    if (est.unstable) {
      est.mean = std::numeric_limits<double>::quiet_NaN();
      est.std_error = std::numeric_limits<double>::quiet_NaN();
      return est;
    }
    if (s.observable.kind == ObservableKind::L1Bins) {
      HistogramEstimator pooled(s.observable.grid);
      est.block_histograms.assign(kBlocks, HistogramEstimator(s.observable.grid));
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        pooled.add(outcomes[i].point[0]);
        est.block_histograms[i % kBlocks].add(outcomes[i].point[0]);
      }
      est.histogram = std::move(pooled);
      return est;
    }
    std::vector<double> values(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      values[i] = observe(s.observable, outcomes[i].point);
    }
    est.mean = mean_and_std_error(values, est.std_error);
    est.std_error_defined = values.size() > 1;
    return est;
  });
}

ObservableEstimate time_average_observable(const ProblemSpec& problem,
                                           const TimeAverageSettings& s) {
  if (s.replicates < 1) {
    throw UsageError("replicates must be >= 1");
  }
  if (s.observable.kind == ObservableKind::L1Bins && problem.dimension != 1) {
    throw UsageError("l1_bins requires a one-dimensional problem");
  }
  const std::uint64_t steps = step_count(s.T, s.h);
  const std::uint64_t burn_in = s.burn_in.value_or(default_burn_in(steps));
  if (burn_in >= steps) {
    throw UsageError("burn_in must be smaller than the number of steps");
  }
  return with_model(problem, [&](const auto& model) {
    using M = std::decay_t<decltype(model)>;
    constexpr int Dim = M::dim;
    const Vec<Dim> x0 = to_state<Dim>(s.x0, problem);
    std::vector<ReplicateOutcome<Dim>> outcomes(static_cast<std::size_t>(s.replicates));
    parallel_for(outcomes.size(), s.workers, [&](std::size_t i) {
      outcomes[i] = run_replicate(model, s.method, s.h, steps, burn_in, s.seed, i, x0,
                                  s.observable);
    });

    ObservableEstimate est;
    est.steps = steps;
    est.burn_in = burn_in;
    est.counters = outcomes.front().counters;
    est.unstable = std::any_of(outcomes.begin(), outcomes.end(),
                               [](const auto& o) { return o.unstable; });
    if (est.unstable) {
      est.mean = std::numeric_limits<double>::quiet_NaN();
      est.std_error = std::numeric_limits<double>::quiet_NaN();
      est.effective_h = s.h;
      return est;
    }
    double mean_weight = 0.0;
    for (const auto& o : outcomes) {
      mean_weight += o.weight_total / static_cast<double>(o.samples);
    }
    est.effective_h = s.h * mean_weight / static_cast<double>(outcomes.size());

    if (s.observable.kind == ObservableKind::L1Bins) {
      HistogramEstimator pooled(s.observable.grid);
      for (const auto& o : outcomes) {
        pooled.merge(*o.histogram);
        est.block_histograms.push_back(*o.histogram);
      }
      est.histogram = std::move(pooled);
      return est;
    }
    std::vector<double> values;
    values.reserve(outcomes.size());
    for (const auto& o : outcomes) {
      values.push_back(o.weighted_sum / o.weight_total);
    }
    est.mean = mean_and_std_error(values, est.std_error);
    est.std_error_defined = values.size() > 1;
    return est;
  });
}

}  // namespace pvd
