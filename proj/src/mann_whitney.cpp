#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fluidity/stats.hpp"

namespace fluidity {

namespace {

constexpr std::size_t kExactLimit = 8;

// Number of arrangements of m first-sample and n second-sample values with
// U == u, for every u: the coefficients of the Gaussian binomial
// [m+n choose m]_q = prod_{i=1..m} (1 - q^(n+i)) / (1 - q^i).
// Each partial product is itself a polynomial with integer coefficients, so
// the division is exact. Empty when a coefficient could overflow.
std::vector<__int128> u_counts(std::size_t m, std::size_t n) {
  if (m > n) std::swap(m, n);
  // C(m+n, m) bounds every coefficient; stay well inside 2^127.
  long double total = 1.0L;
  for (std::size_t i = 1; i <= m; ++i) total = total * static_cast<long double>(n + i) / static_cast<long double>(i);
  if (total > 1e36L) return {};
  std::vector<__int128> poly(m * n + 1, 0);
  poly[0] = 1;
  std::size_t degree = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t k = n + i;
    degree += n;
    for (std::size_t d = degree + 1; d-- > k;) poly[d] -= poly[d - k];  // terms above degree cancel in the division
    for (std::size_t d = i; d <= degree; ++d) poly[d] += poly[d - i];
  }
  return poly;
}

}  // namespace

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MwuMethod method) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Mann-Whitney U needs two non-empty samples");
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t n = n1 + n2;

  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double x : a) pooled.emplace_back(x, 0);
  for (double x : b) pooled.emplace_back(x, 1);
  for (const auto& [x, _] : pooled) {
    if (!std::isfinite(x)) throw std::invalid_argument("Mann-Whitney U needs finite values");
  }
  std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_a += midrank;
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double u1 = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
  const double u2 = dn1 * dn2 - u1;
  const double u = std::max(u1, u2);

  TestResult result;
  result.statistic = u1;
  // Exact unless both samples are large or there are ties.
  const bool want_exact = method == MwuMethod::exact ||
                          (method == MwuMethod::automatic && std::min(n1, n2) <= kExactLimit && tie_term == 0.0);
  if (method == MwuMethod::exact && tie_term != 0.0) throw std::invalid_argument("exact Mann-Whitney U needs untied data");
  const auto counts = want_exact ? u_counts(n1, n2) : std::vector<__int128>{};
  if (method == MwuMethod::exact && counts.empty()) throw std::invalid_argument("samples too large for the exact test");
  if (!counts.empty()) {
    __int128 total = 0, upper = 0;
    const auto from = static_cast<std::size_t>(std::llround(u));
    for (std::size_t k = 0; k < counts.size(); ++k) {
      total += counts[k];
      if (k >= from) upper += counts[k];
    }
    result.method = TestMethod::exact;
    result.p_value = std::min(1.0, 2.0 * static_cast<double>(static_cast<long double>(upper) / static_cast<long double>(total)));
    return result;
  }

  const double dn = static_cast<double>(n);
  const double mu = dn1 * dn2 / 2.0;
  const double variance = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  result.method = TestMethod::asymptotic;
  if (variance <= 0.0) {
    result.p_value = 1.0;
    return result;
  }
  const double z = (u - mu - 0.5) / std::sqrt(variance);
  result.p_value = std::clamp(2.0 * normal_sf(z), 0.0, 1.0);
  return result;
}

}  // namespace fluidity
