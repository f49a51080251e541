#include "pvd/stability.hpp"

#include "pvd/parallel.hpp"
#include "pvd/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>

namespace pvd {

namespace {

void require_post_processed(const MethodKind& method) {
  if (!method.post_processed()) {
    throw UsageError("stability analysis is defined for the post-processed schemes only, not " +
                     method_name(method));
  }
}

}  // namespace

double noise_stability_increment(double q, double R) {
  return q * R + 0.5 * q * q * (R * R - 1.0);
}

StabilityEntries linearised_entries(const MethodKind& method, double p, double q, double R,
                                    const NoiseDraws<1>& signs) {
  require_post_processed(method);
  const LinearTestDynamics m{p, q};
  NoiseDraws<1> draws = signs;
  draws.R = Vec<1>::Constant(R);

  // The map is linear in (X_n, X-bar_{n-1}); probe it on the unit vectors.
  MethodState<1> from_x;
  from_x.x = Vec<1>::Ones();
  from_x.lagged_force = m.drift(Vec<1>::Zero()).f;
  from_x.lagged_ready = true;
  pvd2_step(m, from_x, 1.0, method.scheme, method.noise, draws);

  MethodState<1> from_bar;
  from_bar.x = Vec<1>::Zero();
  from_bar.lagged_force = m.drift(Vec<1>::Ones()).f;
  from_bar.lagged_ready = true;
  pvd2_step(m, from_bar, 1.0, method.scheme, method.noise, draws);

  return {from_x.x[0], from_bar.x[0], from_x.xbar[0]};
}

StabilityEntries stability_entries(const MethodKind& method, double p, double q, double R,
                                   const NoiseDraws<1>& signs) {
  require_post_processed(method);
  if (method.scheme == Scheme::PVD2) {
    const double rhat = noise_stability_increment(q, R);
    return {1.0 + p + 0.5 * p * q * R + rhat, 0.25 * p * rhat, 1.0 + 0.5 * q * R};
  }
  return linearised_entries(method, p, q, R, signs);
}

MomentMatrix moment_matrix(const MethodKind& method, double p, double q, int gauss_nodes) {
  require_post_processed(method);
  const GaussHermiteRule rule = gauss_hermite(gauss_nodes);
  // PVD2 entries do not involve the signs; the modified schemes may.
  const bool needs_signs = method.scheme != Scheme::PVD2;
  const int sign_patterns = needs_signs ? 8 : 1;

  double e11_sq = 0, e12_sq = 0, e11_12 = 0, e21_sq = 0, e21_11 = 0, e21_12 = 0;
  for (int pattern = 0; pattern < sign_patterns; ++pattern) {
    NoiseDraws<1> signs = zero_draws<1>(1);
    signs.chi[0] = (pattern & 1) ? -1.0 : 1.0;
    signs.chi_hat1 = (pattern & 2) ? -1.0 : 1.0;
    signs.chi_hat2 = (pattern & 4) ? -1.0 : 1.0;
    const double pattern_weight = 1.0 / sign_patterns;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const auto e = stability_entries(method, p, q, rule.nodes[k], signs);
      const double w = pattern_weight * rule.weights[k];
      e11_sq += w * e.r11 * e.r11;
      e12_sq += w * e.r12 * e.r12;
      e11_12 += w * e.r11 * e.r12;
      e21_sq += w * e.r21 * e.r21;
      e21_11 += w * e.r21 * e.r11;
      e21_12 += w * e.r21 * e.r12;
    }
  }
  MomentMatrix m;
  m << e11_sq, e12_sq, 2.0 * e11_12,
       e21_sq, 0.0, 0.0,
       e21_11, 0.0, e21_12;
  return m;
}

std::array<std::complex<double>, 3> characteristic_roots(const MomentMatrix& m) {
  using C = std::complex<double>;
  // lambda^3 + a lambda^2 + b lambda + c
  const double a = -m.trace();
  const double b = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                   m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const double c = -m.determinant();
  auto poly = [&](C z) { return ((z + a) * z + b) * z + c; };
  auto dpoly = [&](C z) { return (3.0 * z + 2.0 * a) * z + b; };

  // Cardano on the depressed cubic t^3 + P t + Q, lambda = t - a/3.
  const double P = b - a * a / 3.0;
  const double Q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const C disc = std::sqrt(C(Q * Q / 4.0 + P * P * P / 27.0));
  C u = std::pow(-Q / 2.0 + disc, 1.0 / 3.0);
  if (std::abs(u) < 1e-300) {
    u = std::pow(-Q / 2.0 - disc, 1.0 / 3.0);
  }
  const C omega(-0.5, std::sqrt(3.0) / 2.0);
  std::array<C, 3> roots;
  C uk = u;
  for (auto& r : roots) {
    const C t = std::abs(uk) < 1e-300 ? C(0.0) : uk - P / (3.0 * uk);
    r = t - a / 3.0;
    uk *= omega;
  }
  // Newton polish against cancellation in the closed form.
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      const C d = dpoly(r);
      if (std::abs(d) < 1e-300) break;
      r -= poly(r) / d;
    }
  }
  return roots;
}

double spectral_radius(const MomentMatrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const auto roots = characteristic_roots(m);
  double rho = 0.0;
  bool accepted = true;
  for (const auto& r : roots) {
    const Eigen::Matrix3cd shifted =
        m.cast<std::complex<double>>() - r * Eigen::Matrix3cd::Identity();
    if (!(std::abs(shifted.determinant()) < 1e-9 * scale * scale * scale)) {
      accepted = false;
      break;
    }
    rho = std::max(rho, std::abs(r));
  }
  if (accepted) {
    return rho;
  }
  Eigen::EigenSolver<MomentMatrix> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) {
    throw UsageError("grid resolution must be >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  }
  return out;
}

RegionScan scan_region(const MethodKind& method, const std::vector<double>& p_grid,
                       const std::vector<double>& q2_grid, int workers) {
  require_post_processed(method);
  for (double q2 : q2_grid) {
    if (!(q2 >= 0.0)) {
      throw UsageError("q2 grid values must be non-negative");
    }
  }
  RegionScan scan;
  scan.p = p_grid;
  scan.q2 = q2_grid;
  scan.rho.assign(p_grid.size() * q2_grid.size(), 0.0);
  parallel_for(q2_grid.size(), workers, [&](std::size_t iq) {
    const double q = std::sqrt(q2_grid[iq]);
    for (std::size_t ip = 0; ip < p_grid.size(); ++ip) {
      scan.rho[iq * p_grid.size() + ip] = spectral_radius(moment_matrix(method, p_grid[ip], q));
    }
  });
  return scan;
}

void write_region_csv(std::ostream& os, const RegionScan& scan) {
  os << "p,q2,rho,stable,exact_stable\n";
  os << std::setprecision(17);
  for (std::size_t iq = 0; iq < scan.q2.size(); ++iq) {
    for (std::size_t ip = 0; ip < scan.p.size(); ++ip) {
      const double p = scan.p[ip];
      const double q2 = scan.q2[iq];
      os << p << ',' << q2 << ',' << scan.rho[iq * scan.p.size() + ip] << ','
         << (scan.stable(iq, ip) ? 1 : 0) << ',' << (exact_stable(p, q2) ? 1 : 0) << '\n';
    }
  }
}

double empirical_second_moment(const MethodKind& method, double p, double q, int n_traj,
                               int steps, std::uint64_t seed) {
  require_post_processed(method);
  const LinearTestDynamics m{p, q};
  double sum = 0.0;
  for (int t = 0; t < n_traj; ++t) {
    MethodState<1> st;
    initialize(method, m, st, Vec<1>::Ones());
    for (int n = 0; n < steps; ++n) {
      const auto draws = draw<1>({seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(n)}, 1);
      step(method, m, st, 1.0, draws);
    }
    sum += st.x[0] * st.x[0];
  }
  return sum / n_traj;
}

}  // namespace pvd
