#include "oracles.hpp"
#include "pvd/integrators.hpp"
#include "pvd/stability.hpp"

#include <doctest.h>

#include <numbers>
#include <vector>

using namespace pvd;

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec make(int d, Potential v, Diffusion s, double sigma = 1.0) {
  ProblemSpec p;
  p.dimension = d;
  p.sigma = sigma;
  p.potential = std::move(v);
  p.diffusion = std::move(s);
  return p;
}

std::vector<MethodKind> all_methods() {
  std::vector<MethodKind> out = {{Scheme::EM}, {Scheme::LMd}, {Scheme::LMt}};
  for (auto noise : {NoiseKind::W2Ito1, NoiseKind::MT2}) {
    for (auto s : {Scheme::RK4Strang, Scheme::PVD2, Scheme::PVD2Markov, Scheme::PVD2Mod1,
                   Scheme::PVD2Mod2}) {
      out.push_back({s, noise});
    }
  }
  return out;
}

std::vector<MethodKind> post_processed_methods() {
  std::vector<MethodKind> out;
  for (const auto& m : all_methods()) {
    if (m.post_processed()) out.push_back(m);
  }
  return out;
}

template <Dynamics M>
MethodState<M::dim> started(const MethodKind& k, const M& m, const typename M::VecType& x0) {
  MethodState<M::dim> st;
  initialize(k, m, st, x0);
  return st;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (const auto& k : all_methods()) {
    CHECK(parse_method(method_name(k)) == k);
  }
  CHECK(method_name(parse_method("pvd2_mod2_mt2")) == "pvd2_mod2_mt2");
  CHECK_THROWS_AS(parse_method("pvd3_w2ito1"), UsageError);
  CHECK_THROWS_AS(parse_method("rk4"), UsageError);
  CHECK(consistency_warning({Scheme::LMd}, 2).has_value());
  CHECK_FALSE(consistency_warning({Scheme::LMd}, 1).has_value());
  CHECK_FALSE(consistency_warning({Scheme::PVD2}, 10).has_value());
}

TEST_CASE("Euler-Maruyama: worked values") {
  const Model<Eigen::Dynamic> free(make(3, Quadratic{}, IdentityDiffusion{}));
  auto draws = draw<Eigen::Dynamic>({1, 2, 3}, 3);
  auto st = started({Scheme::EM}, free, Eigen::VectorXd::Zero(3));
  em_step(free, st, 0.01, draws);
  CHECK((st.x - 0.1 * draws.R).cwiseAbs().maxCoeff() < 1e-16);

  const Model<1> quad(make(1, Quadratic{}, IdentityDiffusion{}));
  const oracle::Noiseless<Model<1>> still{quad};
  auto s0 = started({Scheme::EM}, still, Vec<1>(1.0));
  em_step(still, s0, 0.1, zero_draws<1>(1));
  CHECK(s0.x[0] == doctest::Approx(0.9).epsilon(1e-15));

  const Model<1> cosq(make(1, Quadratic{}, Cosine1D{}));
  auto s1 = started({Scheme::EM}, cosq, Vec<1>(kPi / 2));
  em_step(cosq, s1, 0.01, zero_draws<1>(1));
  CHECK(s1.x[0] == doctest::Approx(1.5279).epsilon(1e-4));
  CHECK(s1.x[0] == doctest::Approx(kPi / 2 + 0.01 * (-2.25 * kPi / 2 - 0.75)).epsilon(1e-14));
}

TEST_CASE("drift-corrected Leimkuhler-Matthews: worked values") {
  const Model<1> cosq(make(1, Quadratic{}, Cosine1D{}));
  auto st = started({Scheme::LMd}, cosq, Vec<1>(kPi / 2));
  const Vec<1> zero = Vec<1>::Zero();
  lmd_step(cosq, st, 0.01, zero_draws<1>(1), zero);
  const double F = -2.25 * kPi / 2 - 0.75;
  CHECK(st.x[0] == doctest::Approx(kPi / 2 + 0.01 * F + 0.0025 * 0.5 * (-1.5)).epsilon(1e-14));
  CHECK(st.x[0] == doctest::Approx(1.526079).epsilon(1e-6));

  // Identity and constant Sigma: no correction, plain averaged-noise LM.
  for (const Diffusion& s : {Diffusion{IdentityDiffusion{}}, Diffusion{constant_a()}}) {
    const Model<2> m(make(2, QuadrupleWell{}, s, 0.9));
    const Vec<2> x0(0.3, -0.4);
    const auto dn = draw<2>({4, 0, 0}, 2);
    const auto dn1 = draw<2>({4, 0, 1}, 2);
    auto s2 = started({Scheme::LMd}, m, x0);
    lmd_step(m, s2, 0.05, dn, dn1.R);
    const Vec<2> expected = x0 - 0.05 * m.sigma_matrix(x0) * m.sigma_matrix(x0) *
                                     m.grad_potential(x0) +
                            0.5 * std::sqrt(0.05) * 0.9 * m.sigma_matrix(x0) * (dn.R + dn1.R);
    CHECK((s2.x - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("time-rescaled Leimkuhler-Matthews") {
  // g = 1: plain LM with weight 1.
  const Model<1> plain(make(1, DoubleWell{}, IdentityDiffusion{}));
  const auto dn = draw<1>({5, 0, 0}, 1);
  const auto dn1 = draw<1>({5, 0, 1}, 1);
  auto st = started({Scheme::LMt}, plain, Vec<1>(0.2));
  lmt_step(plain, st, 0.1, dn, dn1.R);
  CHECK(st.sample_weight == 1.0);
  CHECK(st.x[0] == doctest::Approx(0.2 - 0.1 * plain.grad_potential(Vec<1>(0.2))[0] +
                                   0.5 * std::sqrt(0.1) * (dn.R[0] + dn1.R[0]))
                       .epsilon(1e-14));

  // g = exp(V/4), sigma = 1: the rescaled potential is 3V/4.
  const Model<1> expv(make(1, DoubleWell{}, ExpPotential1D{0.25}));
  for (double x : {-1.3, -0.2, 0.0, 0.7, 1.9}) {
    auto s = started({Scheme::LMt}, expv, Vec<1>(x));
    lmt_step(expv, s, 0.1, zero_draws<1>(1), Vec<1>::Zero());
    CHECK(s.x[0] ==
          doctest::Approx(x - 0.1 * 0.75 * expv.grad_potential(Vec<1>(x))[0]).epsilon(1e-12));
    const double g = std::exp(0.25 * expv.potential(Vec<1>(x)));
    CHECK(s.sample_weight == doctest::Approx(1.0 / (g * g)).epsilon(1e-14));
  }

  const Model<2> aniso(make(2, QuadrupleWell{}, RadialProjection2D{}));
  MethodState<2> bad;
  CHECK_THROWS_AS(initialize({Scheme::LMt}, aniso, bad, Vec<2>::Zero()), UsageError);
}

TEST_CASE("RK4 Strang splitting") {
  const Model<1> quad(make(1, Quadratic{}, IdentityDiffusion{}));
  const oracle::Noiseless<Model<1>> still{quad};
  auto st = started({Scheme::RK4Strang, NoiseKind::W2Ito1}, still, Vec<1>(1.0));
  rk4_strang_step(still, st, 0.2, NoiseKind::W2Ito1, draw<1>({1, 1, 1}, 1));
  const auto f = [](double x) { return -x; };
  const double ref = oracle::rk4(f, oracle::rk4(f, 1.0, 0.1), 0.1);
  CHECK(std::abs(st.x[0] - ref) < 1e-12);
  // Two RK4 half steps sit within the RK4 truncation error of exp(-0.2) = 0.818730753...
  CHECK(std::abs(ref - std::exp(-0.2)) < 2e-7);

  // Constant Sigma: half RK4, + sqrt(h) sigma Sigma R, half RK4.
  const ConstantDiffusion three{Eigen::MatrixXd::Constant(1, 1, 3.0)};
  const Model<1> c(make(1, Quadratic{}, three, 0.5));
  const auto d = draw<1>({2, 0, 0}, 1);
  for (auto noise : {NoiseKind::W2Ito1, NoiseKind::MT2}) {
    auto s = started({Scheme::RK4Strang, noise}, c, Vec<1>(0.4));
    rk4_strang_step(c, s, 0.3, noise, d);
    const auto fc = [](double x) { return -9.0 * x; };
    const double mid = oracle::rk4(fc, 0.4, 0.15) + std::sqrt(0.3) * 0.5 * 3.0 * d.R[0];
    CHECK(s.x[0] == doctest::Approx(oracle::rk4(fc, mid, 0.15)).epsilon(1e-13));
    CHECK(s.counters.force == 8);
  }
}

TEST_CASE("post-processor: worked values") {
  const Model<1> id(make(1, Quadratic{}, IdentityDiffusion{}));
  auto d1 = zero_draws<1>(1);
  d1.R[0] = 1.0;
  EvalCounters c;
  CHECK(postprocess(id, Vec<1>(0.0), 0.04, d1, c)[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(postprocess(id, Vec<1>(0.7), 0.0, d1, c)[0] == 0.7);

  const Model<2> a(make(2, QuadrupleWell{}, constant_a()));
  auto d2 = zero_draws<2>(2);
  d2.R = Vec<2>(1.0, 1.0);
  const Vec<2> xb = postprocess(a, Vec<2>::Zero(), 0.01, d2, c);
  CHECK(xb[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(xb[1] == doctest::Approx(0.075).epsilon(1e-15));
  CHECK(c.postprocess_sigma == 3);
  CHECK(c.sigma_columns == 0);
}

TEST_CASE("reduction identity: Sigma = I against the constant-diffusion scheme") {
  const Model<2> m(make(2, QuadrupleWell{}, IdentityDiffusion{}, 0.8));
  const double h = 0.05;
  for (auto noise : {NoiseKind::W2Ito1, NoiseKind::MT2}) {
    for (std::uint64_t traj = 0; traj < 5; ++traj) {
      const Vec<2> x0(0.5, -0.5);
      auto st = started({Scheme::PVD2, noise}, m, x0);
      Vec<2> y = x0;
      for (std::uint64_t n = 0; n < 2000; ++n) {
        const auto d = draw<2>({9, traj, n}, 2);
        const Vec<2> ybar = y + 0.5 * std::sqrt(h) * 0.8 * d.R;
        y = y - h * m.grad_potential(ybar) + std::sqrt(h) * 0.8 * d.R;
        step({Scheme::PVD2, noise}, m, st, h, d);
        REQUIRE((st.xbar - ybar).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((st.x - y).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("constant Sigma: all post-processed variants take identical steps") {
  const Model<2> m(make(2, QuadrupleWell{}, constant_a(), 0.7));
  for (auto noise : {NoiseKind::W2Ito1, NoiseKind::MT2}) {
    std::vector<MethodState<2>> states;
    const std::vector<Scheme> schemes = {Scheme::PVD2, Scheme::PVD2Mod1, Scheme::PVD2Mod2};
    for (auto s : schemes) states.push_back(started({s, noise}, m, Vec<2>(0.9, -1.1)));
    for (std::uint64_t n = 0; n < 200; ++n) {
      const auto d = draw<2>({3, 3, n}, 2);
      for (std::size_t i = 0; i < schemes.size(); ++i) {
        step({schemes[i], noise}, m, states[i], 0.05, d);
      }
      CHECK((states[0].x - states[1].x).cwiseAbs().maxCoeff() < 1e-13);
      CHECK((states[0].x - states[2].x).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("Markovian variant: first step and Sigma = I law") {
  const Model<1> m(make(1, DoubleWell{}, Cosine1D{}));
  const auto d = draw<1>({6, 0, 0}, 1);
  for (auto noise : {NoiseKind::W2Ito1, NoiseKind::MT2}) {
    auto lag = started({Scheme::PVD2, noise}, m, Vec<1>(0.3));
    auto mark = started({Scheme::PVD2Markov, noise}, m, Vec<1>(0.3));
    step({Scheme::PVD2, noise}, m, lag, 0.1, d);
    step({Scheme::PVD2Markov, noise}, m, mark, 0.1, d);
    CHECK(lag.x[0] == mark.x[0]);
  }
  // Sigma = I: the auxiliary point only enters Sigma, so the two forms coincide path-wise.
  const Model<1> id(make(1, DoubleWell{}, IdentityDiffusion{}));
  auto lag = started({Scheme::PVD2}, id, Vec<1>(0.3));
  auto mark = started({Scheme::PVD2Markov}, id, Vec<1>(0.3));
  for (std::uint64_t n = 0; n < 500; ++n) {
    const auto dn = draw<1>({6, 1, n}, 1);
    step({Scheme::PVD2}, id, lag, 0.1, dn);
    step({Scheme::PVD2Markov}, id, mark, 0.1, dn);
  }
  CHECK(lag.x[0] == doctest::Approx(mark.x[0]).epsilon(1e-12));
}

TEST_CASE("zero noise: post-processed schemes reduce to explicit Euler") {
  const Model<2> m(make(2, QuadrupleWell{}, MoroCardin{5.0, 0.3, false}));
  const oracle::Noiseless<Model<2>> still{m};
  for (const auto& k : post_processed_methods()) {
    CAPTURE(method_name(k));
    auto st = started(k, still, Vec<2>(0.4, 0.8));
    Vec<2> y(0.4, 0.8);
    for (std::uint64_t n = 0; n < 50; ++n) {
      step(k, still, st, 0.02, draw<2>({1, 0, n}, 2));
      y += 0.02 * still.drift(y).f;
      CHECK((st.x - y).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
  auto em = started({Scheme::EM}, still, Vec<2>(0.4, 0.8));
  step({Scheme::EM}, still, em, 0.02, draw<2>({1, 0, 0}, 2));
  CHECK((em.x - (Vec<2>(0.4, 0.8) + 0.02 * still.drift(Vec<2>(0.4, 0.8)).f)).norm() < 1e-15);
}

TEST_CASE("lagged force replays bit for bit") {
  const Model<1> m(make(1, Quartic{}, Sine1D{}));
  for (auto s : {Scheme::PVD2, Scheme::PVD2Mod1, Scheme::PVD2Mod2}) {
    const MethodKind k{s, NoiseKind::MT2};
    auto st = started(k, m, Vec<1>(0.1));
    CHECK(st.lagged_force == m.drift(Vec<1>(0.1)).f);
    for (std::uint64_t n = 0; n < 1000; ++n) {
      step(k, m, st, 0.05, draw<1>({2, 2, n}, 1));
      CHECK(st.lagged_force == m.drift(st.xbar).f);
    }
  }
}

TEST_CASE("evaluation budgets over many steps") {
  const Model<2> m(make(2, QuadrupleWell{}, MoroCardin{5.0, 0.3, true}));
  const std::uint64_t N = 1000;
  for (const auto& k : all_methods()) {
    if (k.scheme == Scheme::LMt) continue;  // 1D only; covered below
    CAPTURE(method_name(k));
    auto st = started(k, m, Vec<2>(0.1, 0.2));
    for (std::uint64_t n = 0; n < N; ++n) {
      const auto d = draw<2>({1, 0, n}, 2);
      const auto next = draw<2>({1, 0, n + 1}, 2);
      step(k, m, st, 0.01, d, &next.R);
    }
    const auto per = static_cast<std::uint64_t>(force_evaluations_per_step(k));
    const auto init = static_cast<std::uint64_t>(force_evaluations_at_init(k));
    CHECK(st.counters.force == per * N + init);
    CHECK(st.counters.sigma_evaluations(2) ==
          static_cast<std::uint64_t>(sigma_evaluations_per_step(k)) * N);
    CHECK(st.counters.postprocess_sigma == (k.post_processed() ? N : 0));
  }
  struct Table {
    const char* name;
    int force;
    int sigma;
  };
  for (const auto& t : std::vector<Table>{{"em", 1, 1},
                                          {"lmd", 1, 1},
                                          {"lmt", 1, 1},
                                          {"rk4_w2ito1", 8, 3},
                                          {"rk4_mt2", 8, 5},
                                          {"pvd2_w2ito1", 1, 3},
                                          {"pvd2_mt2", 1, 5},
                                          {"pvd2_markov_w2ito1", 2, 3},
                                          {"pvd2_mod1_mt2", 1, 5},
                                          {"pvd2_mod2_w2ito1", 1, 4}}) {
    CAPTURE(t.name);
    CHECK(force_evaluations_per_step(parse_method(t.name)) == t.force);
    CHECK(sigma_evaluations_per_step(parse_method(t.name)) == t.sigma);
  }
}

TEST_CASE("next Gaussian is required where consumed") {
  const Model<1> m(make(1, Quadratic{}, Cosine1D{}));
  auto st = started({Scheme::LMd}, m, Vec<1>(0.0));
  CHECK_THROWS_AS(step({Scheme::LMd}, m, st, 0.1, zero_draws<1>(1)), UsageError);
  CHECK(MethodKind{Scheme::LMt}.uses_next_gaussian());
  CHECK_FALSE(MethodKind{Scheme::PVD2}.uses_next_gaussian());
}

TEST_CASE("linear test problem: step maps match hand-derived stability entries") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(-3.0, 0.5);
  for (int i = 0; i < 100; ++i) {
    const double p = unif(gen);
    const double q = normal(gen);
    auto d = draw<1>({31, 0, static_cast<std::uint64_t>(i)}, 1);
    const double R = d.R[0];
    const double Rhat = q * R + 0.5 * q * q * (R * R - 1.0);
    const double r21 = 1.0 + 0.5 * q * R;
    const double base11 = 1.0 + p + 0.5 * p * q * R + Rhat;

    for (auto noise : {NoiseKind::W2Ito1, NoiseKind::MT2}) {
      struct Expected {
        Scheme scheme;
        double r11;
        double r12;
      };
      const double mod2_rhat = q * R + 0.5 * q * q * (R * R - 1.0) * (1.0 + 0.5 * p + 0.25 * p * q * R);
      const Expected cases[] = {
          {Scheme::PVD2, base11, 0.25 * p * Rhat},
          {Scheme::PVD2Markov, 1.0 + p + 0.5 * p * q * R + Rhat * (1.0 + 0.25 * p), 0.0},
          {Scheme::PVD2Mod1, base11, 0.25 * p * q * R},
          {Scheme::PVD2Mod2, 1.0 + p + 0.5 * p * q * R + mod2_rhat, 0.25 * p * q * R},
      };
      for (const auto& e : cases) {
        const MethodKind k{e.scheme, noise};
        CAPTURE(method_name(k));
        const auto entries = stability_entries(k, p, q, R, d);
        CHECK(entries.r11 == doctest::Approx(e.r11).epsilon(1e-12));
        CHECK(entries.r12 == doctest::Approx(e.r12).epsilon(1e-12));
        CHECK(entries.r21 == doctest::Approx(r21).epsilon(1e-12));

        // Drive the real step map from (X_n, X-bar_{n-1}) = (x, y).
        const LinearTestDynamics lin{p, q};
        const double x = normal(gen), y = normal(gen);
        MethodState<1> st;
        st.x = Vec<1>(x);
        st.lagged_force = Vec<1>(p * y);
        st.lagged_ready = true;
        pvd2_step(lin, st, 1.0, e.scheme, noise, d);
        CHECK(st.x[0] == doctest::Approx(e.r11 * x + e.r12 * y).epsilon(1e-11));
        CHECK(st.xbar[0] == doctest::Approx(r21 * x).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("fixed and dynamic dimension give the same trajectory") {
  const ProblemSpec spec = make(10, Ring{50.0}, RingRadial{});
  const Model<10> fixed(spec);
  const Model<Eigen::Dynamic> dynamic(spec);
  for (auto noise : {NoiseKind::W2Ito1, NoiseKind::MT2}) {
    const MethodKind k{Scheme::PVD2, noise};
    Vec<10> x0 = Vec<10>::Zero();
    x0[0] = 1.0;
    auto a = started(k, fixed, x0);
    auto b = started(k, dynamic, Eigen::VectorXd(x0));
    for (std::uint64_t n = 0; n < 200; ++n) {
      step(k, fixed, a, 0.01, draw<10>({12, 0, n}, 10));
      step(k, dynamic, b, 0.01, draw<Eigen::Dynamic>({12, 0, n}, 10));
    }
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(a.counters.sigma_columns == b.counters.sigma_columns);
  }
}
