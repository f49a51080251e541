#include "pvd/model.hpp"

#include <cmath>
#include <type_traits>

namespace pvd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kQuadWellShift = 17.0 / 16.0;

bool accepts_dimension(const Diffusion& diffusion, int d) {
  return std::visit(overloaded{
                        [d](const ConstantDiffusion& c) {
                          return c.sigma.rows() == d && c.sigma.cols() == d;
                        },
                        [d](const Cosine1D&) { return d == 1; },
                        [d](const Sine1D&) { return d == 1; },
                        [d](const ExpPotential1D&) { return d == 1; },
                        [d](const RadialProjection2D&) { return d == 2; },
                        [](const auto&) { return true; },
                    },
                    diffusion);
}

// Radial part beta(s) of D = I - beta(|x|^2) x x^T and its derivative in s.
struct RadialCoefficient {
  double beta;
  double dbeta_ds;
};

RadialCoefficient radial_projection_coefficient(double s) {
  const double w = 2.0 * s + 1.0;
  return {2.0 / w - s / (w * w), -4.0 / (w * w) - (1.0 - 2.0 * s) / (w * w * w)};
}

}  // namespace

void validate(const ProblemSpec& spec) {
  if (spec.dimension < 1) {
    throw UsageError("dimension must be >= 1");
  }
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw UsageError("sigma must be positive and finite");
  }
  if (!accepts_dimension(spec.diffusion, spec.dimension)) {
    throw UsageError("diffusion '" + diffusion_name(spec.diffusion) +
                     "' is not defined in dimension " + std::to_string(spec.dimension));
  }
  if (const auto* ring = std::get_if<Ring>(&spec.potential); ring && !(ring->k > 0.0)) {
    throw UsageError("ring stiffness k must be positive");
  }
  if (const auto* mc = std::get_if<MoroCardin>(&spec.diffusion);
      mc && (!(mc->eps > 0.0) || !(mc->amplitude >= 0.0))) {
    throw UsageError("moro_cardin requires eps > 0 and A >= 0");
  }
  if (const auto* c = std::get_if<ConstantDiffusion>(&spec.diffusion)) {
    if ((c->sigma - c->sigma.transpose()).cwiseAbs().maxCoeff() != 0.0) {
      throw UsageError("constant diffusion matrix must be symmetric");
    }
    if (c->sigma.llt().info() != Eigen::Success) {
      throw UsageError("constant diffusion matrix must be positive definite");
    }
  }
}

bool is_isotropic(const Diffusion& diffusion) {
  return std::visit(overloaded{
                        [](const IdentityDiffusion&) { return true; },
                        [](const Cosine1D&) { return true; },
                        [](const Sine1D&) { return true; },
                        [](const ExpPotential1D&) { return true; },
                        [](const MoroCardin&) { return true; },
                        [](const auto&) { return false; },
                    },
                    diffusion);
}

std::string potential_name(const Potential& potential) {
  return std::visit(overloaded{
                        [](const Quadratic&) { return std::string("quadratic"); },
                        [](const Quartic&) { return std::string("quartic"); },
                        [](const DoubleWell&) { return std::string("double_well"); },
                        [](const QuadrupleWell&) { return std::string("quadruple_well"); },
                        [](const Ring&) { return std::string("ring"); },
                    },
                    potential);
}

std::string diffusion_name(const Diffusion& diffusion) {
  return std::visit(overloaded{
                        [](const IdentityDiffusion&) { return std::string("identity"); },
                        [](const ConstantDiffusion&) { return std::string("constant"); },
                        [](const Cosine1D&) { return std::string("cosine"); },
                        [](const Sine1D&) { return std::string("sine"); },
                        [](const ExpPotential1D&) { return std::string("exp_potential"); },
                        [](const MoroCardin&) { return std::string("moro_cardin"); },
                        [](const RadialProjection2D&) { return std::string("radial_projection"); },
                        [](const RingRadial&) { return std::string("ring_radial"); },
                    },
                    diffusion);
}

ConstantDiffusion constant_a() {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.0, 0.0, 1.5;
  return {m};
}

template <int Dim>
Model<Dim>::Model(ProblemSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  if (Dim != Eigen::Dynamic && Dim != spec_.dimension) {
    throw UsageError("model instantiated for dimension " + std::to_string(Dim) +
                     " but problem has dimension " + std::to_string(spec_.dimension));
  }
  if (const auto* c = std::get_if<ConstantDiffusion>(&spec_.diffusion)) {
    constant_ = c->sigma;
  }
}

template <int Dim>
void Model<Dim>::dimension_mismatch(Eigen::Index got) const {
  throw UsageError("state has dimension " + std::to_string(got) + ", expected " +
                   std::to_string(spec_.dimension));
}

template <int Dim>
double Model<Dim>::potential(const VecType& x) const {
  check(x);
  return std::visit(overloaded{
                        [&](const Quadratic&) { return 0.5 * x.squaredNorm(); },
                        [&](const Quartic&) { return 0.25 * x.array().pow(4).sum(); },
                        [&](const DoubleWell&) {
                          return (0.5 * x.array().square() + (1.0 + 3.0 * x.array()).sin())
                              .sum();
                        },
                        [&](const QuadrupleWell&) {
                          const auto x2 = x.array().square();
                          return (kQuadWellShift - 2.0 * x2 + x2.square()).sqrt().sum();
                        },
                        [&](const Ring& r) {
                          const double gap = 1.0 - x.norm();
                          return 0.5 * r.k * gap * gap;
                        },
                    },
                    spec_.potential);
}

template <int Dim>
typename Model<Dim>::VecType Model<Dim>::grad_potential(const VecType& x) const {
  check(x);
  return std::visit(overloaded{
                        [&](const Quadratic&) -> VecType { return x; },
                        [&](const Quartic&) -> VecType { return x.array().cube().matrix(); },
                        [&](const DoubleWell&) -> VecType {
                          return (x.array() + 3.0 * (1.0 + 3.0 * x.array()).cos()).matrix();
                        },
                        [&](const QuadrupleWell&) -> VecType {
                          const auto x2 = x.array().square();
                          const auto root = (kQuadWellShift - 2.0 * x2 + x2.square()).sqrt();
                          return ((2.0 * x.array().cube() - 2.0 * x.array()) / root).matrix();
                        },
                        [&](const Ring& r) -> VecType {
                          const double radius = x.norm();
                          if (radius == 0.0) {
                            return VecType::Zero(x.size());
                          }
                          return (-r.k * (1.0 - radius) / radius) * x;
                        },
                    },
                    spec_.potential);
}

template <int Dim>
double Model<Dim>::isotropic_factor(const VecType& x) const {
  check(x);
  return std::visit(
      overloaded{
          [](const IdentityDiffusion&) { return 1.0; },
          [&](const Cosine1D&) { return 1.5 + 0.5 * std::cos(x[0]); },
          [&](const Sine1D&) { return 1.5 + 0.5 * std::sin(x[0]); },
          [&](const ExpPotential1D& e) { return std::exp(e.c * potential(x)); },
          [&](const MoroCardin& m) {
            const double bump =
                1.0 + m.amplitude * std::exp(-x.squaredNorm() / (2.0 * m.eps * m.eps));
            return m.inverted ? 1.0 / bump : bump;
          },
          [](const auto&) -> double { throw UsageError("diffusion field is not isotropic"); },
      },
      spec_.diffusion);
}

template <int Dim>
typename Model<Dim>::MatType Model<Dim>::sigma_matrix(const VecType& x) const {
  check(x);
  const int d = spec_.dimension;
  return std::visit(overloaded{
                        [&](const ConstantDiffusion&) -> MatType { return constant_; },
                        [&](const RadialProjection2D&) -> MatType {
                          MatType m = MatType::Identity(d, d);
                          m.noalias() -= (x * x.transpose()) / (2.0 * x.squaredNorm() + 1.0);
                          return m;
                        },
                        [&](const RingRadial&) -> MatType {
                          MatType m = MatType::Identity(d, d);
                          const double s = x.squaredNorm();
                          if (s > 0.0) {
                            m.noalias() -= (x * x.transpose()) / (2.0 * s);
                          }
                          return m;
                        },
                        [&](const auto&) -> MatType {
                          return isotropic_factor(x) * MatType::Identity(d, d);
                        },
                    },
                    spec_.diffusion);
}

template <int Dim>
typename Model<Dim>::VecType Model<Dim>::sigma_column(const VecType& x, int a) const {
  check(x);
  const int d = spec_.dimension;
  return std::visit(overloaded{
                        [&](const ConstantDiffusion&) -> VecType { return constant_.col(a); },
                        [&](const RadialProjection2D&) -> VecType {
                          VecType c = (-x[a] / (2.0 * x.squaredNorm() + 1.0)) * x;
                          c[a] += 1.0;
                          return c;
                        },
                        [&](const RingRadial&) -> VecType {
                          const double s = x.squaredNorm();
                          VecType c = VecType::Zero(d);
                          if (s > 0.0) {
                            c = (-x[a] / (2.0 * s)) * x;
                          }
                          c[a] += 1.0;
                          return c;
                        },
                        [&](const auto&) -> VecType {
                          VecType c = VecType::Zero(d);
                          c[a] = isotropic_factor(x);
                          return c;
                        },
                    },
                    spec_.diffusion);
}

template <int Dim>
typename Model<Dim>::VecType Model<Dim>::div_D(const VecType& x) const {
  check(x);
  const int d = spec_.dimension;
  // Isotropic fields: D = g^2 I, so div D = 2 g grad g.
  return std::visit(
      overloaded{
          [&](const IdentityDiffusion&) -> VecType { return VecType::Zero(d); },
          [&](const ConstantDiffusion&) -> VecType { return VecType::Zero(d); },
          [&](const Cosine1D&) -> VecType {
            VecType v(d);
            v[0] = 2.0 * (1.5 + 0.5 * std::cos(x[0])) * (-0.5 * std::sin(x[0]));
            return v;
          },
          [&](const Sine1D&) -> VecType {
            VecType v(d);
            v[0] = 2.0 * (1.5 + 0.5 * std::sin(x[0])) * (0.5 * std::cos(x[0]));
            return v;
          },
          [&](const ExpPotential1D& e) -> VecType {
            const double g = std::exp(e.c * potential(x));
            return (2.0 * e.c * g * g) * grad_potential(x);
          },
          [&](const MoroCardin& m) -> VecType {
            const double inv_eps2 = 1.0 / (m.eps * m.eps);
            const double bump_tail = m.amplitude * std::exp(-0.5 * x.squaredNorm() * inv_eps2);
            const double bump = 1.0 + bump_tail;
            // grad(bump) = -bump_tail x / eps^2; g = bump^{+-1}.
            const double grad_scale = -bump_tail * inv_eps2;
            if (m.inverted) {
              return (-2.0 * grad_scale / (bump * bump * bump)) * x;
            }
            return (2.0 * bump * grad_scale) * x;
          },
          [&](const RadialProjection2D&) -> VecType {
            const double s = x.squaredNorm();
            const auto [beta, dbeta] = radial_projection_coefficient(s);
            return (-(2.0 * s * dbeta + (d + 1) * beta)) * x;
          },
          [&](const RingRadial&) -> VecType {
            const double s = x.squaredNorm();
            if (s == 0.0) {
              return VecType::Zero(d);
            }
            return (-0.75 * (d - 1) / s) * x;
          },
      },
      spec_.diffusion);
}

template <int Dim>
DriftEval<Dim> Model<Dim>::drift(const VecType& x) const {
  const MatType s = sigma_matrix(x);
  DriftEval<Dim> out;
  out.gradient_term = -(s * (s * grad_potential(x)));
  out.divergence_term = (0.5 * spec_.sigma * spec_.sigma) * div_D(x);
  out.f = out.gradient_term + out.divergence_term;
  return out;
}

template class Model<1>;
template class Model<2>;
template class Model<10>;
template class Model<Eigen::Dynamic>;

}  // namespace pvd
