#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "fluidity/report.hpp"
#include "fluidity/run_dir.hpp"

namespace fluidity {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string out = buf;
  if (out.starts_with("-") && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);  // no "-0.000000"
  return out;
}

namespace {

std::string scientific(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", value);
  return buf;
}

std::string slug_part(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '.' || c == '_';
    out += keep ? c : '_';
  }
  return out.empty() ? "_" : out;
}

// Ids never contain commas or quotes in practice; quote defensively anyway.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string combo_slug(const Combo& combo) {
  return slug_part(combo.image_generator_id) + "__" + slug_part(combo.captioner_id);
}

double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0,1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxSummary box_summary(const Combo& combo, std::span<const int> lengths) {
  if (lengths.empty()) throw std::invalid_argument("box summary of an empty sample for " + combo.key());
  std::vector<double> v(lengths.begin(), lengths.end());
  std::sort(v.begin(), v.end());
  return {combo, v.size(), v.front(), quantile_linear(v, 0.25), quantile_linear(v, 0.5), quantile_linear(v, 0.75),
          v.back()};
}

LengthSample load_length_sample(const std::filesystem::path& run_dir) {
  const RunDirectory dir(run_dir);
  if (!dir.has_manifest()) throw std::runtime_error("no manifest in " + run_dir.string());
  return {dir.load_manifest().combo, load_lengths(dir)};
}

std::string histogram_csv(const LengthDistribution& dist) {
  std::string out = "bin,count,frequency\n";
  for (int bin = 1; bin <= kMaxChainSteps; ++bin) {
    const auto c = dist.count(bin);
    const double f = dist.n > 0 ? static_cast<double>(c) / static_cast<double>(dist.n) : 0.0;
    out += std::to_string(bin) + "," + std::to_string(c) + "," + fixed(f) + "\n";
  }
  return out;
}

std::string box_summary_csv(const std::vector<BoxSummary>& rows) {
  std::string out = "image_generator,captioner,n,min,q1,median,q3,max\n";
  for (const auto& r : rows) {
    out += csv_field(r.combo.image_generator_id) + "," + csv_field(r.combo.captioner_id) + "," + std::to_string(r.n) +
           "," + fixed(r.min) + "," + fixed(r.q1) + "," + fixed(r.median) + "," + fixed(r.q3) + "," + fixed(r.max) +
           "\n";
  }
  return out;
}

std::string fluidity_scale_csv(const std::vector<FluidityEntry>& scale) {
  std::string out = "rank,image_generator,captioner,kl_divergence\n";
  for (std::size_t i = 0; i < scale.size(); ++i) {
    out += std::to_string(i + 1) + "," + csv_field(scale[i].combo.image_generator_id) + "," +
           csv_field(scale[i].combo.captioner_id) + "," + fixed(scale[i].kl_to_uniform) + "\n";
  }
  return out;
}

// p_value keeps 4 decimals; p_value_sci carries the full value.
std::string comparisons_csv(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "kind,image_generator_1,captioner_1,image_generator_2,captioner_2,u_statistic,method,p_value,p_value_sci,"
      "threshold,significant\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.kind)) + "," + csv_field(r.first.image_generator_id) + "," +
           csv_field(r.first.captioner_id) + "," + csv_field(r.second.image_generator_id) + "," +
           csv_field(r.second.captioner_id) + "," + fixed(r.test.statistic) + "," + std::string(to_string(r.test.method)) +
           "," + fixed(r.test.p_value, 4) + "," + scientific(r.test.p_value) + "," + fixed(r.threshold) + "," +
           (r.significant ? "true" : "false") + "\n";
  }
  return out;
}

// Skewness and Shapiro-Wilk are left empty where undefined (fewer than 3
// chains or every chain the same length).
std::string stats_csv(const std::vector<LengthSample>& samples) {
  std::string out = "image_generator,captioner,n,kl_divergence,mean_chain_length,skewness,shapiro_w,shapiro_p\n";
  for (const auto& s : samples) {
    const LengthDistribution d = histogram(s.lengths, s.combo);
    std::vector<double> x(s.lengths.begin(), s.lengths.end());
    std::string skew, w, p;
    try {
      skew = fixed(skewness(x));
    } catch (const std::invalid_argument&) {
    }
    try {
      const TestResult sw = shapiro_wilk(x);
      w = fixed(sw.statistic);
      p = scientific(sw.p_value);
    } catch (const std::invalid_argument&) {
    }
    out += csv_field(s.combo.image_generator_id) + "," + csv_field(s.combo.captioner_id) + "," +
           std::to_string(d.n) + "," + (d.n > 0 ? fixed(kl_to_uniform(d)) : "") + "," + (d.n > 0 ? fixed(d.mean()) : "") +
           "," + skew + "," + w + "," + p + "\n";
  }
  return out;
}

ReportBundle emit_report(const std::vector<LengthSample>& runs, const std::vector<LengthSample>& controls, double alpha,
                         const std::filesystem::path& out_dir) {
  std::vector<LengthSample> all = runs;
  all.insert(all.end(), controls.begin(), controls.end());
  std::sort(all.begin(), all.end(), [](const LengthSample& a, const LengthSample& b) { return a.combo < b.combo; });
  std::set<std::string> slugs;
  for (const auto& s : all) {
    if (s.lengths.empty()) throw std::invalid_argument("combination " + s.combo.key() + " has no complete chains");
    if (!slugs.insert(combo_slug(s.combo)).second) {
      throw std::invalid_argument("two inputs share the combination " + s.combo.key());
    }
  }

  ReportBundle bundle;
  bundle.comparisons = compare_to_controls(runs, controls, alpha);

  std::filesystem::create_directories(out_dir);
  auto emit = [&](const std::string& name, const std::string& contents) {
    const auto path = out_dir / name;
    write_file_atomic(path, contents);
    bundle.files.push_back(path);
  };

  std::vector<LengthDistribution> dists;
  std::vector<BoxSummary> boxes;
  for (const auto& s : all) {
    const LengthDistribution d = histogram(s.lengths, s.combo);
    emit("histogram_" + combo_slug(s.combo) + ".csv", histogram_csv(d));
    emit("histogram_" + combo_slug(s.combo) + ".svg", histogram_svg(d));
    dists.push_back(d);
    boxes.push_back(box_summary(s.combo, s.lengths));
  }
  bundle.scale = fluidity_scale(dists);
  emit("box_summary.csv", box_summary_csv(boxes));
  emit("fluidity_scale.csv", fluidity_scale_csv(bundle.scale));
  emit("fluidity_scale.svg", fluidity_scale_svg(bundle.scale));
  emit("comparisons.csv", comparisons_csv(bundle.comparisons));
  emit("stats.csv", stats_csv(all));
  return bundle;
}

ReportBundle emit_report(const std::vector<std::filesystem::path>& run_dirs,
                         const std::vector<std::filesystem::path>& control_dirs, double alpha,
                         const std::filesystem::path& out_dir) {
  std::vector<LengthSample> runs, controls;
  for (const auto& d : run_dirs) runs.push_back(load_length_sample(d));
  for (const auto& d : control_dirs) controls.push_back(load_length_sample(d));
  return emit_report(runs, controls, alpha, out_dir);
}

}  // namespace fluidity
