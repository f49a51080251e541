#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <variant>

namespace pvd {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

/// Raised for malformed input: bad dimensions, unknown keys, invalid configs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Potentials. Multi-dimensional variants of the 1D potentials act coordinate
// by coordinate; Ring is radial.
// ---------------------------------------------------------------------------
struct Quadratic {};      // |x|^2 / 2
struct Quartic {};        // sum x_i^4 / 4
struct DoubleWell {};     // sum x_i^2/2 + sin(1 + 3 x_i)
struct QuadrupleWell {};  // sum sqrt(17/16 - 2 x_i^2 + x_i^4)
struct Ring {
  double k = 50.0;        // k (1 - |x|)^2 / 2
};
using Potential = std::variant<Quadratic, Quartic, DoubleWell, QuadrupleWell, Ring>;

// ---------------------------------------------------------------------------
// Diffusion fields Sigma(x); D = Sigma^2 with Sigma symmetric.
// ---------------------------------------------------------------------------
struct IdentityDiffusion {};
struct ConstantDiffusion {
  Eigen::MatrixXd sigma;
};
struct Cosine1D {};  // 3/2 + cos(x)/2
struct Sine1D {};    // 3/2 + sin(x)/2
struct ExpPotential1D {
  double c = 0.25;   // exp(c V(x))
};
/// Isotropic (1 + A exp(-|x|^2 / (2 eps^2)))^{+-1} I; `inverted` selects the -1 power.
struct MoroCardin {
  double amplitude = 5.0;
  double eps = 0.3;
  bool inverted = true;
};
struct RadialProjection2D {};  // I - x x^T / (2|x|^2 + 1)
struct RingRadial {};          // I - x x^T / (2|x|^2), I at the origin
using Diffusion = std::variant<IdentityDiffusion, ConstantDiffusion, Cosine1D, Sine1D,
                               ExpPotential1D, MoroCardin, RadialProjection2D, RingRadial>;

struct ProblemSpec {
  int dimension = 1;
  double sigma = 1.0;
  Potential potential = Quadratic{};
  Diffusion diffusion = IdentityDiffusion{};
};

/// Throws UsageError unless d >= 1, sigma > 0 and both fields accept d.
void validate(const ProblemSpec& spec);

/// True when Sigma(x) = g(x) I for a scalar field g.
bool is_isotropic(const Diffusion& diffusion);

std::string potential_name(const Potential& potential);
std::string diffusion_name(const Diffusion& diffusion);

/// Sigma_A from the quadruple-well study: diag(2, 3/2).
ConstantDiffusion constant_a();

template <int Dim>
struct DriftEval {
  Vec<Dim> f;           ///< F(x) = gradient_term + divergence_term
  Vec<Dim> gradient_term;   ///< -D(x) grad V(x)
  Vec<Dim> divergence_term; ///< (sigma^2 / 2) div D(x)
};

/**
 * @brief Analytic evaluation of V, grad V, Sigma, div(Sigma^2) and the drift F.
 *
 * Dim is either a fixed dimension or Eigen::Dynamic. All member functions are
 * pure; evaluation counting is done by the integrators.
 */
template <int Dim>
class Model {
 public:
  using VecType = Vec<Dim>;
  using MatType = Mat<Dim>;
  static constexpr int dim = Dim;

  explicit Model(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  double sigma() const { return spec_.sigma; }

  double potential(const VecType& x) const;
  VecType grad_potential(const VecType& x) const;

  MatType sigma_matrix(const VecType& x) const;
  VecType sigma_column(const VecType& x, int a) const;
  /// Scalar g(x) for isotropic fields; throws UsageError otherwise.
  double isotropic_factor(const VecType& x) const;

  /// Column-wise divergence of D = Sigma^2.
  VecType div_D(const VecType& x) const;

  DriftEval<Dim> drift(const VecType& x) const;

 private:
  void check(const VecType& x) const {
    if constexpr (Dim == Eigen::Dynamic) {
      if (x.size() != spec_.dimension) dimension_mismatch(x.size());
    }
  }
  [[noreturn]] void dimension_mismatch(Eigen::Index got) const;

  ProblemSpec spec_;
  MatType constant_;
};

extern template class Model<1>;
extern template class Model<2>;
extern template class Model<10>;
extern template class Model<Eigen::Dynamic>;

}  // namespace pvd
