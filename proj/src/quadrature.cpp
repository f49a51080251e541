#include "pvd/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pvd {

namespace {

struct SimpsonPanel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

void refine(const std::function<double(double)>& f, const SimpsonPanel& p, double tol, int depth,
            QuadratureResult& acc) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
  const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
  const double diff = left + right - p.whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
    acc.value += left + right + diff / 15.0;
    acc.error += std::abs(diff) / 15.0;
    return;
  }
  refine(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1, acc);
  refine(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1, acc);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, int panels, int max_depth) {
  if (!(b > a) || panels < 1) {
    throw std::invalid_argument("adaptive_simpson: need b > a and panels >= 1");
  }
  const double width = (b - a) / panels;
  std::vector<SimpsonPanel> pieces;
  pieces.reserve(panels);
  double coarse = 0.0;
  double f_left = f(a);
  for (int i = 0; i < panels; ++i) {
    const double pa = a + i * width;
    const double pb = i + 1 == panels ? b : a + (i + 1) * width;
    const double pm = 0.5 * (pa + pb);
    const double fm = f(pm);
    const double fb = f(pb);
    const double whole = simpson(pa, pb, f_left, fm, fb);
    pieces.push_back({pa, pm, pb, f_left, fm, fb, whole});
    coarse += std::abs(whole);
    f_left = fb;
  }
  const double tol = std::max(rel_tol * coarse, std::numeric_limits<double>::min()) / panels;
  QuadratureResult acc;
  for (const auto& piece : pieces) {
    refine(f, piece, tol, max_depth, acc);
  }
  return acc;
}

std::pair<double, double> truncation_interval(const std::function<double(double)>& log_f,
                                              double lo, double hi, double cutoff,
                                              bool hard_lower) {
  constexpr int kGrid = 4000;
  double best = -std::numeric_limits<double>::infinity();
  double arg = 0.5 * (lo + hi);
  for (int i = 0; i <= kGrid; ++i) {
    const double x = lo + (hi - lo) * i / kGrid;
    const double v = log_f(x);
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  const double threshold = best + std::log(cutoff);
  const double step0 = (hi - lo) / kGrid;

  auto expand = [&](double direction, double limit_start) {
    // Walk outwards until the integrand stays below the cutoff for a full doubling.
    double x = arg;
    double step = step0;
    double last_above = arg;
    while (std::abs(x - arg) < 1e6) {
      x += direction * step;
      if (hard_lower && direction < 0 && x <= limit_start) {
        return limit_start;
      }
      if (log_f(x) >= threshold) {
        last_above = x;
      } else if (std::abs(x - last_above) > std::max(1.0, std::abs(last_above - arg))) {
        return last_above + direction * step;
      }
      step *= 1.05;
    }
    throw std::runtime_error("truncation_interval: density does not decay");
  };
  return {expand(-1.0, lo), expand(1.0, hi)};
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) {
    throw std::invalid_argument("gauss_hermite: n must be >= 1");
  }
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

}  // namespace pvd
