#pragma once

#include "pvd/model.hpp"

#include <cstdint>
#include <limits>

namespace pvd {

/// Addresses the random inputs of one step of one trajectory.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t trajectory = 0;
  std::uint64_t step = 0;
};

/**
 * @brief SplitMix64 stream seeded from a hashed StreamKey.
 *
 * Satisfies UniformRandomBitGenerator, so it plugs into the standard
 * distributions. Draws for different keys are decorrelated by the hash;
 * there is no sequential state shared between keys.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(const StreamKey& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t state_;
};

/// One step's random inputs. J and J_hat are deterministic functions of (R, chi, chi_hat).
template <int Dim>
struct NoiseDraws {
  Vec<Dim> R;
  Vec<Dim> chi;  ///< Rademacher signs used by MT2
  double chi_hat1 = 1.0;
  double chi_hat2 = 1.0;

  int dimension() const { return static_cast<int>(R.size()); }

  /// MT2 table (0-based indices).
  double J(int a, int b) const {
    if (a == b) return 0.5 * (R[a] * R[a] - 1.0);
    if (a > b) return 0.5 * (R[a] * R[b] - chi[a]);
    return 0.5 * (R[a] * R[b] + chi[b]);
  }

  /// W2Ito1 table (0-based indices).
  double J_hat(int a, int b) const {
    if (a == b) return 0.5 * chi_hat1 * (R[a] * R[a] - 1.0);
    if (a > b) return 0.5 * R[b] * (1.0 + chi_hat2);
    return 0.5 * R[b] * (1.0 - chi_hat2);
  }

  Mat<Dim> J_table() const;
  Mat<Dim> J_hat_table() const;
};

/// Deterministic in key; R is always the prefix of the stream, so draw(key).R == gaussian_vector(key).
template <int Dim>
NoiseDraws<Dim> draw(const StreamKey& key, int d);

template <int Dim>
Vec<Dim> gaussian_vector(const StreamKey& key, int d);

/// All-zero Gaussians with +1 signs; deterministic test input.
template <int Dim>
NoiseDraws<Dim> zero_draws(int d);

}  // namespace pvd
