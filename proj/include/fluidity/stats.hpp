#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluidity/domain.hpp"

namespace fluidity {

enum class TestMethod { exact, asymptotic };

std::string_view to_string(TestMethod method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::asymptotic;
};

struct FluidityEntry {
  Combo combo;
  double kl_to_uniform = 0.0;
};

/// Throws std::invalid_argument for a length outside 1..15.
LengthDistribution histogram(std::span<const int> lengths, Combo combo = {});

/// g1 = m3 / m2^1.5 with population moments. Needs n >= 3 and nonzero variance.
double skewness(std::span<const double> sample);

/// Royston's approximation (AS R94). Needs 3 <= n <= 5000 and nonzero range.
TestResult shapiro_wilk(std::span<const double> sample);

/// Two-sided test with midranks. Exact null distribution when the smaller
/// sample has at most 8 values and there are no ties; otherwise the normal
/// approximation with tie-corrected variance and continuity correction.
/// `statistic` is U for the first sample. Forcing `exact` with ties, or with
/// samples too large to enumerate, throws std::invalid_argument.
enum class MwuMethod { automatic, exact, asymptotic };
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          MwuMethod method = MwuMethod::automatic);

double bonferroni_alpha(double alpha, int m);

/// KL(P || uniform over 15 bins), natural log. Throws for n == 0.
double kl_to_uniform(const LengthDistribution& dist);

/// Sorted ascending by KL, so the most fluid combination comes first.
std::vector<FluidityEntry> fluidity_scale(const std::vector<LengthDistribution>& dists);
std::vector<FluidityEntry> fluidity_scale(std::vector<FluidityEntry> entries);

/// Upper tail of the standard normal.
double normal_sf(double z);
/// Inverse of the standard normal CDF (AS 241).
double normal_quantile(double p);

/// Raw chain lengths of one combination.
struct LengthSample {
  Combo combo;
  std::vector<int> lengths;
};

enum class ComparisonKind { control, image_generator, captioner };

std::string_view to_string(ComparisonKind kind);

struct ComparisonRow {
  ComparisonKind kind = ComparisonKind::control;
  Combo first;
  Combo second;
  TestResult test;
  double threshold = 0.0;  // Bonferroni-corrected alpha
  bool significant = false;
};

/// Every configured pair, corrected for the total pair count:
///  - each run against the control with the same captioner,
///  - image generators against each other under a shared captioner,
///  - captioners against each other under a shared generator (controls included).
/// Throws std::invalid_argument for duplicate combinations, a run whose
/// captioner has no control (when controls are given) or empty samples.
std::vector<ComparisonRow> compare_to_controls(const std::vector<LengthSample>& runs,
                                               const std::vector<LengthSample>& controls, double alpha);

}  // namespace fluidity
