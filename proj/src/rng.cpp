#include "pvd/rng.hpp"

#include <random>

namespace pvd {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <int Dim>
void fill_gaussians(CounterRng& rng, Vec<Dim>& out, int d) {
  std::normal_distribution<double> normal;
  out.resize(d);
  for (int i = 0; i < d; ++i) {
    out[i] = normal(rng);
  }
}

}  // namespace

CounterRng::CounterRng(const StreamKey& key) {
  std::uint64_t h = mix64(key.master_seed + kGolden);
  h = mix64(h ^ (key.trajectory + 2 * kGolden));
  h = mix64(h ^ (key.step + 3 * kGolden));
  state_ = h;
}

CounterRng::result_type CounterRng::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

template <int Dim>
Mat<Dim> NoiseDraws<Dim>::J_table() const {
  const int d = dimension();
  Mat<Dim> m(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      m(a, b) = J(a, b);
    }
  }
  return m;
}

template <int Dim>
Mat<Dim> NoiseDraws<Dim>::J_hat_table() const {
  const int d = dimension();
  Mat<Dim> m(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      m(a, b) = J_hat(a, b);
    }
  }
  return m;
}

template <int Dim>
NoiseDraws<Dim> draw(const StreamKey& key, int d) {
  CounterRng rng(key);
  NoiseDraws<Dim> out;
  fill_gaussians<Dim>(rng, out.R, d);
  out.chi.resize(d);
  std::uint64_t bits = rng();
  int available = 64;
  auto next_sign = [&]() {
    if (available == 0) {
      bits = rng();
      available = 64;
    }
    const double s = (bits & 1U) ? 1.0 : -1.0;
    bits >>= 1;
    --available;
    return s;
  };
  out.chi_hat1 = next_sign();
  out.chi_hat2 = next_sign();
  for (int i = 0; i < d; ++i) {
    out.chi[i] = next_sign();
  }
  return out;
}

template <int Dim>
Vec<Dim> gaussian_vector(const StreamKey& key, int d) {
  CounterRng rng(key);
  Vec<Dim> out;
  fill_gaussians<Dim>(rng, out, d);
  return out;
}

template <int Dim>
NoiseDraws<Dim> zero_draws(int d) {
  NoiseDraws<Dim> out;
  out.R = Vec<Dim>::Zero(d);
  out.chi = Vec<Dim>::Ones(d);
  return out;
}

#define PVD_INSTANTIATE_RNG(D)                                  \
  template struct NoiseDraws<D>;                                \
  template NoiseDraws<D> draw<D>(const StreamKey&, int);        \
  template Vec<D> gaussian_vector<D>(const StreamKey&, int);    \
  template NoiseDraws<D> zero_draws<D>(int);

PVD_INSTANTIATE_RNG(1)
PVD_INSTANTIATE_RNG(2)
PVD_INSTANTIATE_RNG(10)
PVD_INSTANTIATE_RNG(Eigen::Dynamic)

#undef PVD_INSTANTIATE_RNG

}  // namespace pvd
