#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fluidity/stats.hpp"

namespace fluidity {

namespace {

// Evaluates cc[0] + cc[1]*x + ... + cc[nord-1]*x^(nord-1).
double poly(const double* cc, int nord, double x) {
  double ret = cc[0];
  if (nord > 1) {
    double p = x * cc[nord - 1];
    for (int j = nord - 2; j > 0; --j) p = (p + cc[j]) * x;
    ret += p;
  }
  return ret;
}

constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[] = {-0.4803, -0.082676, 0.0030302};
constexpr double kG[] = {-2.273, 0.459};

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw std::invalid_argument("Shapiro-Wilk needs at least 3 values");
  if (n > 5000) throw std::invalid_argument("Shapiro-Wilk supports at most 5000 values");
  std::vector<double> x(sample.begin(), sample.end());
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("Shapiro-Wilk needs finite values");
  }
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (range < 1e-19 * std::max(1.0, std::fabs(x.front()))) {
    throw std::invalid_argument("Shapiro-Wilk of a zero-variance sample");
  }

  const double an = static_cast<double>(n);
  const std::size_t half = n / 2;
  std::vector<double> a(half + 1, 0.0);  // 1-based coefficients
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    const double an25 = an + 0.25;
    std::vector<double> m(half + 1, 0.0);
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= half; ++i) {
      m[i] = normal_quantile((static_cast<double>(i) - 0.375) / an25);
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(kC1, 6, rsn) - m[1] / ssumm2;
    std::size_t first_plain;
    double fac;
    if (n > 5) {
      first_plain = 3;
      const double a2 = -m[2] / ssumm2 + poly(kC2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      first_plain = 2;
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (std::size_t i = first_plain; i <= half; ++i) a[i] = -m[i] / fac;
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= an;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  double numerator = 0.0;
  for (std::size_t i = 1; i <= half; ++i) numerator += a[i] * (x[n - i] - x[i - 1]);
  double w = std::min(1.0, numerator * numerator / ss);

  TestResult result;
  result.method = TestMethod::asymptotic;
  result.statistic = w;
  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;
    constexpr double stqr = 1.04719755119660;
    result.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return result;
  }

  const double w1 = 1.0 - w;
  if (w1 <= 0.0) {
    result.p_value = 1.0;
    return result;
  }
  double y = std::log(w1);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly(kG, 2, an);
    if (y >= gamma) {
      result.p_value = 1e-99;
      return result;
    }
    y = -std::log(gamma - y);
    mu = poly(kC3, 4, an);
    sigma = std::exp(poly(kC4, 4, an));
  } else {
    const double xx = std::log(an);
    mu = poly(kC5, 4, xx);
    sigma = std::exp(poly(kC6, 3, xx));
  }
  result.p_value = std::clamp(normal_sf((y - mu) / sigma), 0.0, 1.0);
  return result;
}

}  // namespace fluidity
