#include "oracles.hpp"
#include "pvd/rng.hpp"

#include <doctest.h>

using namespace pvd;

TEST_CASE("J and J-hat tables: worked values") {
  NoiseDraws<Eigen::Dynamic> one;
  one.R = Eigen::VectorXd::Constant(1, 1.0);
  one.chi = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(one.J(0, 0) == 0.0);

  NoiseDraws<Eigen::Dynamic> two;
  two.R = Eigen::Vector2d(1.0, 2.0);
  two.chi = Eigen::Vector2d(1.0, -1.0);
  two.chi_hat2 = 1.0;
  CHECK(two.J(1, 0) == 1.5);  // a > b uses chi_a: (2 - (-1)) / 2
  CHECK(two.J(0, 1) == 0.5);  // a < b uses chi_b: (2 + (-1)) / 2
  CHECK(two.J_hat(0, 1) == 0.0);
  CHECK(two.J_hat(1, 0) == 1.0);
}

TEST_CASE("J table matches the published a > b example with chi = (1, .)") {
  NoiseDraws<2> d;
  d.R = Vec<2>(1.0, 2.0);
  d.chi = Vec<2>(1.0, 1.0);
  // J_{2,1} = (R_2 R_1 - chi_2) / 2 = (2 - 1) / 2.
  CHECK(d.J(1, 0) == 0.5);
}

TEST_CASE("symmetrisation identities hold exactly") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto d = draw<Eigen::Dynamic>({7, 3, s}, 4);
    for (int a = 0; a < 4; ++a) {
      CHECK(2.0 * d.J(a, a) + 1.0 == doctest::Approx(d.R[a] * d.R[a]).epsilon(1e-15));
      for (int b = 0; b < 4; ++b) {
        if (a != b) {
          CHECK(d.J(a, b) + d.J(b, a) == doctest::Approx(d.R[a] * d.R[b]).epsilon(1e-15));
        }
      }
    }
    const auto table = d.J_table();
    const auto hat = d.J_hat_table();
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        CHECK(table(a, b) == d.J(a, b));
        CHECK(hat(a, b) == d.J_hat(a, b));
      }
    }
  }
}

TEST_CASE("draws are deterministic in the key and Rademacher valued") {
  const StreamKey key{42, 5, 9};
  const auto a = draw<Eigen::Dynamic>(key, 3);
  const auto b = draw<Eigen::Dynamic>(key, 3);
  CHECK(a.R == b.R);
  CHECK(a.chi == b.chi);
  CHECK(a.chi_hat1 == b.chi_hat1);
  CHECK(a.chi_hat2 == b.chi_hat2);
  CHECK(gaussian_vector<Eigen::Dynamic>(key, 3) == a.R);
  // Fixed-size and dynamic paths give identical bits.
  CHECK(draw<2>(key, 2).R == draw<Eigen::Dynamic>(key, 2).R);
  CHECK(draw<1>(key, 1).chi == draw<Eigen::Dynamic>(key, 1).chi);

  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto d = draw<Eigen::Dynamic>({1, 0, s}, 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(d.chi[i]) == 1.0);
    CHECK(std::abs(d.chi_hat1) == 1.0);
    CHECK(std::abs(d.chi_hat2) == 1.0);
  }
  CHECK(draw<Eigen::Dynamic>({1, 0, 0}, 2).R != draw<Eigen::Dynamic>({2, 0, 0}, 2).R);
}

TEST_CASE("Gaussian moments over 1e6 draws") {
  constexpr int n = 1'000'000;
  oracle::Moments m0, m1;
  for (int s = 0; s < n; ++s) {
    const auto r = gaussian_vector<2>({2024, 0, static_cast<std::uint64_t>(s)}, 2);
    m0.add(r[0]);
    m1.add(r[1]);
  }
  CHECK(std::abs(m0.mean) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m1.mean) < 4.0 / std::sqrt(n));
  CHECK(m0.variance() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m1.variance() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("J and J-hat entries have zero mean and Rademacher signs are fair") {
  constexpr int n = 1'000'000;
  constexpr int d = 3;
  std::vector<oracle::Moments> j(d * d), jh(d * d);
  oracle::Moments chi, chi1, chi2;
  for (int s = 0; s < n; ++s) {
    const auto dr = draw<Eigen::Dynamic>({99, 1, static_cast<std::uint64_t>(s)}, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        j[a * d + b].add(dr.J(a, b));
        jh[a * d + b].add(dr.J_hat(a, b));
      }
    }
    chi.add(dr.chi[0]);
    chi1.add(dr.chi_hat1);
    chi2.add(dr.chi_hat2);
  }
  for (int k = 0; k < d * d; ++k) {
    CHECK(std::abs(j[k].mean) < 5.0 * j[k].std_error());
    CHECK(std::abs(jh[k].mean) < 5.0 * jh[k].std_error());
  }
  CHECK(std::abs(chi.mean) < 5.0 * chi.std_error());
  CHECK(std::abs(chi1.mean) < 5.0 * chi1.std_error());
  CHECK(std::abs(chi2.mean) < 5.0 * chi2.std_error());
}

TEST_CASE("streams for distinct trajectories are uncorrelated") {
  constexpr int n = 1'000'000;
  double sxy = 0.0, sxx = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
  for (int s = 0; s < n; ++s) {
    const double x = gaussian_vector<1>({5, 0, static_cast<std::uint64_t>(s)}, 1)[0];
    const double y = gaussian_vector<1>({5, 1, static_cast<std::uint64_t>(s)}, 1)[0];
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double mx = sx / n, my = sy / n;
  const double rho = (sxy / n - mx * my) / std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
  CHECK(std::abs(rho) < 5.0 / std::sqrt(n));
}

TEST_CASE("zero draws") {
  const auto z = zero_draws<Eigen::Dynamic>(3);
  CHECK(z.R.isZero(0.0));
  CHECK(z.chi == Eigen::VectorXd::Ones(3));
  CHECK(z.chi_hat1 == 1.0);
  CHECK(z.chi_hat2 == 1.0);
}
