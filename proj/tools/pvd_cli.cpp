// Command-line front end: run experiments, print reference values, scan
// stability regions and fit convergence slopes.

#include "pvd/config.hpp"
#include "pvd/harness.hpp"
#include "pvd/stability.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

constexpr int kUsageExit = 2;
constexpr int kRuntimeExit = 1;

int run_command(const std::string& config_path, bool quiet) {
  const auto cfg = pvd::load_experiment(config_path);
  const auto records = pvd::run_experiment(cfg, quiet ? nullptr : &std::cerr);
  if (cfg.out.empty()) {
    pvd::write_records_csv(std::cout, cfg, records);
  }
  return 0;
}

int reference_command(const std::string& config_path, const std::string& panel_path,
                      double panel_lo, double panel_hi, int panel_points) {
  const auto doc = pvd::KeyValueDocument::load(config_path);
  const auto cfg = pvd::experiment_from_document(doc);
  const auto ref = pvd::run_reference(cfg.problem, cfg.observable);
  std::cout << std::setprecision(17);
  if (cfg.observable.kind == pvd::ObservableKind::SquareNorm) {
    std::cout << "square_norm " << ref.value << " quadrature_error " << ref.quadrature_error
              << '\n';
  } else {
    std::cout << "bin,lo,hi,mass\n";
    const auto& grid = cfg.observable.grid;
    for (std::size_t i = 0; i < ref.bin_masses.size(); ++i) {
      std::cout << i << ',' << grid.lo + grid.width() * static_cast<double>(i) << ','
                << grid.lo + grid.width() * static_cast<double>(i + 1) << ','
                << ref.bin_masses[i] << '\n';
    }
    std::cout << "# total_mass " << ref.value << " quadrature_error " << ref.quadrature_error
              << '\n';
  }
  if (!panel_path.empty()) {
    std::ofstream os(panel_path);
    if (!os) {
      throw std::runtime_error("cannot write panel to '" + panel_path + "'");
    }
    pvd::write_problem_panel(os, cfg.problem, panel_lo, panel_hi, panel_points);
  }
  return 0;
}

int stability_command(const std::string& method_name, double pmin, double pmax, double q2min,
                      double q2max, int res, const std::string& out) {
  const auto method = pvd::parse_method(method_name);
  const auto scan = pvd::scan_region(method, pvd::linspace(pmin, pmax, res),
                                     pvd::linspace(q2min, q2max, res),
                                     pvd::resolve_workers(0));
  if (out.empty()) {
    pvd::write_region_csv(std::cout, scan);
    return 0;
  }
  std::ofstream os(out);
  if (!os) {
    throw std::runtime_error("cannot write region to '" + out + "'");
  }
  pvd::write_region_csv(os, scan);
  return 0;
}

int slope_command(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) {
    throw pvd::UsageError("cannot open results CSV '" + csv_path + "'");
  }
  const auto records = pvd::read_records_csv(in);
  std::cout << "method,slope\n" << std::setprecision(6);
  for (const auto& [method, slope] : pvd::slopes_by_method(records)) {
    std::cout << method << ',' << slope << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Samplers for Brownian dynamics with position-dependent diffusion"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a convergence experiment from a config file");
  run->add_option("config", config_path, "Experiment config")->required();
  run->add_flag("-q,--quiet", quiet, "Suppress progress lines on stderr");

  std::string panel_path;
  double panel_lo = -5.0;
  double panel_hi = 5.0;
  int panel_points = 401;
  auto* reference = app.add_subcommand("reference", "Print the quadrature reference values");
  reference->add_option("config", config_path, "Experiment config")->required();
  reference->add_option("--panel", panel_path, "Write x,V,Sigma samples (1D problems) to a CSV");
  reference->add_option("--panel-lo", panel_lo, "Panel lower bound");
  reference->add_option("--panel-hi", panel_hi, "Panel upper bound");
  reference->add_option("--panel-points", panel_points, "Panel sample count");

  std::string method = "pvd2_w2ito1";
  double pmin = -4.0;
  double pmax = 0.0;
  double q2min = 0.0;
  double q2max = 4.0;
  int res = 400;
  std::string out;
  auto* stability = app.add_subcommand("stability", "Scan the mean-square stability region");
  stability->add_option("--method", method, "Post-processed method name");
  stability->add_option("--pmin", pmin, "Lower p bound");
  stability->add_option("--pmax", pmax, "Upper p bound");
  stability->add_option("--q2min", q2min, "Lower q^2 bound");
  stability->add_option("--q2max", q2max, "Upper q^2 bound");
  stability->add_option("--res", res, "Grid points per axis")->check(CLI::PositiveNumber);
  stability->add_option("--out", out, "Output CSV (stdout when omitted)");

  std::string csv_path;
  auto* slope = app.add_subcommand("slope", "Fit log-log convergence slopes per method");
  slope->add_option("csv", csv_path, "Results CSV written by `run`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (run->parsed()) return run_command(config_path, quiet);
    if (reference->parsed()) {
      return reference_command(config_path, panel_path, panel_lo, panel_hi, panel_points);
    }
    if (stability->parsed()) return stability_command(method, pmin, pmax, q2min, q2max, res, out);
    if (slope->parsed()) return slope_command(csv_path);
  } catch (const pvd::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return kUsageExit;
}
