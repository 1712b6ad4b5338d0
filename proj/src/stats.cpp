#include "fluidity/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace fluidity {

std::string_view to_string(TestMethod method) { return method == TestMethod::exact ? "exact" : "asymptotic"; }

std::string_view to_string(ComparisonKind kind) {
  switch (kind) {
    case ComparisonKind::control: return "control";
    case ComparisonKind::image_generator: return "image_generator";
    case ComparisonKind::captioner: return "captioner";
  }
  return "unknown";
}

LengthDistribution histogram(std::span<const int> lengths, Combo combo) {
  LengthDistribution d;
  d.combo = std::move(combo);
  for (int len : lengths) {
    if (len < 1 || len > kMaxChainSteps) {
      throw std::invalid_argument("chain length " + std::to_string(len) + " outside 1.." +
                                  std::to_string(kMaxChainSteps));
    }
    ++d.counts[static_cast<std::size_t>(len - 1)];
    ++d.n;
  }
  return d;
}

double skewness(std::span<const double> sample) {
  if (sample.size() < 3) throw std::invalid_argument("skewness needs at least 3 values");
  const double n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : sample) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  // Relative cut-off so that float noise around a constant sample still counts as zero variance.
  if (m2 <= 1e-28 * std::max(1.0, mean * mean)) throw std::invalid_argument("skewness of a zero-variance sample");
  return m3 / std::pow(m2, 1.5);
}

double bonferroni_alpha(double alpha, int m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (m < 1) throw std::invalid_argument("Bonferroni needs at least one test");
  return alpha / m;
}

double kl_to_uniform(const LengthDistribution& dist) {
  if (dist.n <= 0) throw std::invalid_argument("KL divergence of an empty distribution");
  const double bins = static_cast<double>(kMaxChainSteps);
  double kl = 0.0;
  for (auto c : dist.counts) {
    if (c < 0) throw std::invalid_argument("negative histogram count");
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(dist.n);
    kl += p * std::log(p * bins);
  }
  return std::max(0.0, kl);
}

std::vector<FluidityEntry> fluidity_scale(std::vector<FluidityEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const FluidityEntry& a, const FluidityEntry& b) { return a.kl_to_uniform < b.kl_to_uniform; });
  return entries;
}

std::vector<FluidityEntry> fluidity_scale(const std::vector<LengthDistribution>& dists) {
  std::vector<FluidityEntry> entries;
  entries.reserve(dists.size());
  for (const auto& d : dists) entries.push_back({d.combo, kl_to_uniform(d)});
  return fluidity_scale(std::move(entries));
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal quantile needs p in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                 1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                 0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

namespace {

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

ComparisonRow run_pair(ComparisonKind kind, const LengthSample& a, const LengthSample& b) {
  if (a.lengths.empty() || b.lengths.empty()) {
    throw std::invalid_argument("comparison " + a.combo.key() + " vs " + b.combo.key() + " has an empty sample");
  }
  ComparisonRow row;
  row.kind = kind;
  row.first = a.combo;
  row.second = b.combo;
  const auto x = as_doubles(a.lengths);
  const auto y = as_doubles(b.lengths);
  row.test = mann_whitney_u(x, y);
  return row;
}

void require_unique(const std::vector<LengthSample>& samples, const std::string& what) {
  std::set<Combo> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.combo).second) throw std::invalid_argument("duplicate " + what + " combination " + s.combo.key());
  }
}

}  // namespace

std::vector<ComparisonRow> compare_to_controls(const std::vector<LengthSample>& runs,
                                               const std::vector<LengthSample>& controls, double alpha) {
  require_unique(runs, "run");
  require_unique(controls, "control");
  std::map<std::string, const LengthSample*> control_by_captioner;
  for (const auto& c : controls) {
    if (!control_by_captioner.emplace(c.combo.captioner_id, &c).second) {
      throw std::invalid_argument("two controls share captioner " + c.combo.captioner_id);
    }
  }

  std::vector<const LengthSample*> sorted_runs;
  for (const auto& r : runs) sorted_runs.push_back(&r);
  std::sort(sorted_runs.begin(), sorted_runs.end(),
            [](const LengthSample* a, const LengthSample* b) { return a->combo < b->combo; });

  std::vector<ComparisonRow> rows;
  if (!controls.empty()) {
    for (const auto* r : sorted_runs) {
      auto it = control_by_captioner.find(r->combo.captioner_id);
      if (it == control_by_captioner.end()) {
        throw std::invalid_argument("no control for captioner " + r->combo.captioner_id);
      }
      rows.push_back(run_pair(ComparisonKind::control, *r, *it->second));
    }
  }

  // Image generators under a shared captioner.
  std::map<std::string, std::vector<const LengthSample*>> by_captioner;
  for (const auto* r : sorted_runs) by_captioner[r->combo.captioner_id].push_back(r);
  for (const auto& [captioner, group] : by_captioner) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        rows.push_back(run_pair(ComparisonKind::image_generator, *group[i], *group[j]));
      }
    }
  }

  // Captioners under a shared generator, treating the controls as one more generator.
  std::map<std::string, std::vector<const LengthSample*>> by_generator;
  for (const auto& c : controls) by_generator[c.combo.image_generator_id].push_back(&c);
  for (const auto* r : sorted_runs) by_generator[r->combo.image_generator_id].push_back(r);
  for (auto& [generator, group] : by_generator) {
    std::sort(group.begin(), group.end(),
              [](const LengthSample* a, const LengthSample* b) { return a->combo < b->combo; });
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        if (group[i]->combo.captioner_id == group[j]->combo.captioner_id) continue;
        rows.push_back(run_pair(ComparisonKind::captioner, *group[i], *group[j]));
      }
    }
  }

  if (rows.empty()) return rows;
  const double threshold = bonferroni_alpha(alpha, static_cast<int>(rows.size()));
  for (auto& row : rows) {
    row.threshold = threshold;
    row.significant = row.test.p_value < threshold;
  }
  return rows;
}

}  // namespace fluidity
