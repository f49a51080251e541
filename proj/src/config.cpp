#include "pvd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pvd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) {
      return v;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("key '" + key + "': '" + text + "' is not a number");
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("key '" + key + "': '" + text + "' is not a boolean");
}

}  // namespace

KeyValueDocument KeyValueDocument::parse(const std::string& text) {
  KeyValueDocument doc;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw UsageError("line " + std::to_string(line_no) + ": empty key");
    }
    if (!doc.values_.emplace(key, value).second) {
      throw UsageError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open config file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> KeyValueDocument::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    return std::nullopt;
  }
  used_.insert(key);
  return it->second;
}

std::string KeyValueDocument::require(const std::string& key) const {
  auto v = get(key);
  if (!v) {
    throw UsageError("missing required key '" + key + "'");
  }
  return *v;
}

double KeyValueDocument::number(const std::string& key, std::optional<double> fallback) const {
  const auto v = get(key);
  if (!v) {
    if (fallback) return *fallback;
    throw UsageError("missing required key '" + key + "'");
  }
  return to_number(key, *v);
}

std::int64_t KeyValueDocument::integer(const std::string& key,
                                       std::optional<std::int64_t> fallback) const {
  const double v = number(key, fallback ? std::optional<double>(static_cast<double>(*fallback))
                                        : std::nullopt);
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    throw UsageError("key '" + key + "' must be an integer");
  }
  return static_cast<std::int64_t>(v);
}

std::vector<std::string> KeyValueDocument::list(const std::string& key) const {
  std::vector<std::string> out;
  const auto v = get(key);
  if (!v) {
    return out;
  }
  std::string item;
  std::istringstream in(*v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

std::vector<double> KeyValueDocument::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) {
    out.push_back(to_number(key, item));
  }
  return out;
}

std::vector<std::string> KeyValueDocument::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) {
      out.push_back(key);
    }
  }
  return out;
}

std::vector<double> full_step_sizes() {
  std::vector<double> out;
  for (int k = 20; k >= 0; --k) {
    out.push_back(std::pow(10.0, -2.0 + 0.1 * k));
  }
  return out;
}

ProblemSpec problem_from_document(const KeyValueDocument& doc) {
  ProblemSpec spec;
  spec.dimension = static_cast<int>(doc.integer("dimension", 1));
  spec.sigma = doc.number("sigma", 1.0);

  const std::string potential = doc.require("potential");
  if (potential == "quadratic") {
    spec.potential = Quadratic{};
  } else if (potential == "quartic") {
    spec.potential = Quartic{};
  } else if (potential == "double_well") {
    spec.potential = DoubleWell{};
  } else if (potential == "quadruple_well") {
    spec.potential = QuadrupleWell{};
  } else if (potential == "ring") {
    spec.potential = Ring{doc.number("k", 50.0)};
  } else {
    throw UsageError("unknown potential '" + potential + "'");
  }

  const std::string diffusion = doc.get("diffusion").value_or("identity");
  if (diffusion == "identity") {
    spec.diffusion = IdentityDiffusion{};
  } else if (diffusion == "constant_a") {
    spec.diffusion = constant_a();
  } else if (diffusion == "constant") {
    const auto entries = doc.numbers("sigma_matrix");
    const auto d = static_cast<std::size_t>(spec.dimension);
    if (entries.size() != d * d) {
      throw UsageError("sigma_matrix needs dimension^2 = " + std::to_string(d * d) +
                       " row-major entries");
    }
    Eigen::MatrixXd m(spec.dimension, spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) {
      for (int j = 0; j < spec.dimension; ++j) {
        m(i, j) = entries[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)];
      }
    }
    spec.diffusion = ConstantDiffusion{m};
  } else if (diffusion == "cosine") {
    spec.diffusion = Cosine1D{};
  } else if (diffusion == "sine") {
    spec.diffusion = Sine1D{};
  } else if (diffusion == "exp_potential") {
    spec.diffusion = ExpPotential1D{doc.number("c", 0.25)};
  } else if (diffusion == "moro_cardin") {
    const auto inverted = doc.get("inverted");
    spec.diffusion = MoroCardin{doc.number("A", 5.0), doc.number("eps", 0.3),
                                inverted ? to_bool("inverted", *inverted) : true};
  } else if (diffusion == "radial_projection") {
    spec.diffusion = RadialProjection2D{};
  } else if (diffusion == "ring_radial") {
    spec.diffusion = RingRadial{};
  } else {
    throw UsageError("unknown diffusion '" + diffusion + "'");
  }
  validate(spec);
  return spec;
}

ExperimentConfig experiment_from_document(const KeyValueDocument& doc) {
  ExperimentConfig cfg;
  cfg.name = doc.get("name").value_or("experiment");
  cfg.problem = problem_from_document(doc);

  const auto method_names = doc.list("methods");
  if (method_names.empty()) {
    throw UsageError("methods must list at least one method");
  }
  for (const auto& name : method_names) {
    cfg.methods.push_back(parse_method(name));
  }

  if (const auto preset = doc.get("h_preset")) {
    if (*preset != "full") {
      throw UsageError("unknown h_preset '" + *preset + "' (expected full)");
    }
    cfg.h_list = full_step_sizes();
  } else {
    cfg.h_list = doc.numbers("h_list");
  }
  if (cfg.h_list.empty()) {
    throw UsageError("h_list must not be empty");
  }
  for (double h : cfg.h_list) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw UsageError("h_list entries must be positive");
    }
  }
  std::sort(cfg.h_list.begin(), cfg.h_list.end(), std::greater<>());
  cfg.h_list.erase(std::unique(cfg.h_list.begin(), cfg.h_list.end()), cfg.h_list.end());

  const std::string mode = doc.require("mode");
  if (mode == "time_average") {
    TimeAverageMode m;
    m.T = doc.number("T");
    if (doc.has("burn_in")) {
      const auto b = doc.integer("burn_in");
      if (b < 0) throw UsageError("burn_in must be >= 0");
      m.burn_in = static_cast<std::uint64_t>(b);
    }
    m.replicates = static_cast<int>(doc.integer("replicates", 8));
    if (m.replicates < 1) throw UsageError("replicates must be >= 1");
    cfg.mode = m;
  } else if (mode == "ensemble") {
    EnsembleMode m;
    m.T = doc.number("T");
    m.n_traj = static_cast<int>(doc.integer("n_traj"));
    if (m.n_traj < 1) throw UsageError("n_traj must be >= 1");
    cfg.mode = m;
  } else {
    throw UsageError("unknown mode '" + mode + "' (expected time_average or ensemble)");
  }
  const double T = std::visit([](const auto& m) { return m.T; }, cfg.mode);
  if (!(T > 0.0)) {
    throw UsageError("T must be positive");
  }

  const std::string observable = doc.get("observable").value_or("square_norm");
  if (observable == "square_norm") {
    cfg.observable.kind = ObservableKind::SquareNorm;
  } else if (observable == "l1_bins") {
    cfg.observable.kind = ObservableKind::L1Bins;
    if (cfg.problem.dimension != 1) {
      throw UsageError("observable l1_bins requires dimension = 1");
    }
    cfg.observable.grid.lo = doc.number("bins_lo", -5.0);
    cfg.observable.grid.hi = doc.number("bins_hi", 5.0);
    cfg.observable.grid.bins = static_cast<int>(doc.integer("bins", 30));
  } else {
    throw UsageError("unknown observable '" + observable + "'");
  }

  for (const auto& method : cfg.methods) {
    if (method.scheme == Scheme::LMt) {
      if (cfg.problem.dimension != 1 || !is_isotropic(cfg.problem.diffusion)) {
        throw UsageError("lmt requires a one-dimensional isotropic diffusion");
      }
      if (std::holds_alternative<EnsembleMode>(cfg.mode)) {
        throw UsageError("lmt is only available in time_average mode");
      }
    }
  }

  const auto seed = doc.integer("seed", 0);
  if (seed < 0) throw UsageError("seed must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.out = doc.get("out").value_or("");
  if (doc.has("x0")) {
    const auto v = doc.numbers("x0");
    if (v.size() != static_cast<std::size_t>(cfg.problem.dimension)) {
      throw UsageError("x0 must have dimension entries");
    }
    cfg.x0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  cfg.workers = static_cast<int>(doc.integer("workers", 0));

  if (const auto unused = doc.unused_keys(); !unused.empty()) {
    throw UsageError("unknown or unused config key '" + unused.front() + "'");
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return experiment_from_document(KeyValueDocument::load(path));
}

}  // namespace pvd
