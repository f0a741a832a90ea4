#pragma once

// Seeded sampling helpers. Every random quantity in the library flows from an
// explicit 64-bit seed through one of these; nothing reads the wall clock.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "mixmin/error.hpp"

namespace mixmin {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Decorrelated sub-seed for stream `stream` of a master seed (splitmix64
// finalizer). Keeps independent sampling stages from sharing a generator.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Unit-rate exponential draw.
inline double unit_exponential(Rng& rng) {
  return -std::log1p(-uniform01(rng));
}

// Uniform point on the (n-1)-simplex: normalized i.i.d. unit-rate
// exponentials.
inline std::vector<double> sample_simplex_uniform(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = unit_exponential(rng);
    sum += x;
  }
  if (sum <= 0.0) {
    // All draws underflowed to zero; astronomically unlikely.
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(n));
    return v;
  }
  for (auto& x : v) x /= sum;
  return v;
}

// Symmetric Dirichlet(concentration) draw of dimension n.
inline std::vector<double> sample_dirichlet(std::size_t n, double concentration,
                                            Rng& rng) {
  if (concentration <= 0.0) throw Error("Dirichlet concentration must be > 0");
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = gamma(rng);
    sum += x;
  }
  if (sum <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(n));
    return v;
  }
  for (auto& x : v) x /= sum;
  return v;
}

// Inclusive prefix sums of a pmf, for inverse-CDF sampling.
inline std::vector<double> cumulative_pmf(const std::vector<double>& pmf) {
  std::vector<double> cum(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cum.begin());
  if (!cum.empty()) cum.back() = 1.0;  // close the last bin against rounding
  return cum;
}

inline std::size_t sample_categorical(const std::vector<double>& cum, Rng& rng) {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;
  return static_cast<std::size_t>(it - cum.begin());
}

// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    if (j >= i) j = i - 1;
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace mixmin
