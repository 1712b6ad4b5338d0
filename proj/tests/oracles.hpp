#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace fluidity::test {

// Two-sided exact p by enumerating every split of the pooled values:
// P(|U - mn/2| >= |u_obs - mn/2|). Values must be distinct.
inline double brute_force_mwu_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n1 = a.size(), n = pooled.size();
  auto u_of = [&](const std::vector<bool>& in_a) {
    double u = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!in_a[j] && pooled[i] > pooled[j]) u += 1;
      }
    }
    return u;
  };
  std::vector<bool> obs(n, false);
  std::fill(obs.begin(), obs.begin() + static_cast<long>(n1), true);
  const double mu = static_cast<double>(n1 * (n - n1)) / 2.0;
  const double dev = std::abs(u_of(obs) - mu);
  std::vector<bool> mask(n, false);
  std::fill(mask.end() - static_cast<long>(n1), mask.end(), true);
  double hit = 0, total = 0;
  do {
    total += 1;
    if (std::abs(u_of(mask) - mu) >= dev - 1e-9) hit += 1;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return hit / total;
}

inline std::vector<double> distinct_integers(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> pool(100);
  std::iota(pool.begin(), pool.end(), 0.0);
  std::shuffle(pool.begin(), pool.end(), rng);
  return {pool.begin(), pool.begin() + static_cast<long>(n)};
}

}  // namespace fluidity::test
