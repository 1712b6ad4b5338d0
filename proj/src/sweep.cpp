#include <algorithm>
#include <stdexcept>

#include "fluidity/metrics.hpp"
#include "fluidity/report.hpp"
#include "fluidity/run_dir.hpp"

namespace fluidity {

using nlohmann::json;

void SweepGrid::validate() const {
  auto check = [](const std::vector<double>& values, const char* name) {
    if (values.empty()) throw std::invalid_argument(std::string("sweep grid: '") + name + "' is empty");
    if (!std::is_sorted(values.begin(), values.end())) {
      throw std::invalid_argument(std::string("sweep grid: '") + name + "' must be ascending");
    }
  };
  check(semantic_values, "semantic");
  check(compat_values, "compat");
  check(label_values, "label");
  for (const auto& t : points()) t.validate();
}

std::vector<Thresholds> SweepGrid::points() const {
  std::vector<Thresholds> out;
  for (double s : semantic_values) {
    for (double c : compat_values) {
      for (double l : label_values) out.push_back({c, s, l});
    }
  }
  return out;
}

SweepGrid sweep_grid_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("sweep grid must be a JSON object");
  const Thresholds defaults;
  auto list = [&](const char* key, double fallback) {
    if (!j.contains(key)) return std::vector<double>{fallback};
    const json& v = j.at(key);
    if (!v.is_array()) throw std::invalid_argument(std::string("sweep grid: '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw std::invalid_argument(std::string("sweep grid: '") + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  };
  SweepGrid grid{list("semantic", defaults.semantic_min), list("compat", defaults.compat_min),
                 list("label", defaults.label_min)};
  grid.validate();
  return grid;
}

SweepGrid default_sweep_grid() {
  const Thresholds t;
  return {{0.25, 0.5, 0.75}, {t.compat_min}, {t.label_min}};
}

namespace {

void require_metrics(const ChainRecord& r) {
  if (!r.complete || r.steps.empty()) throw std::runtime_error("chain " + r.seed.id + " has no stored metrics");
}

int reapply(const ChainRecord& r, const Thresholds& t) {
  for (const auto& s : r.steps) {
    if (evaluate_step(s.metrics, t).broken) return s.index;
  }
  return static_cast<int>(r.steps.size());
}

SweepRow summarize(const Thresholds& t, const std::vector<int>& lengths) {
  SweepRow row;
  row.thresholds = t;
  row.chains = lengths.size();
  if (lengths.empty()) return row;
  double sum = 0.0;
  std::size_t at_one = 0;
  for (int len : lengths) {
    sum += len;
    if (len == 1) ++at_one;
  }
  const double n = static_cast<double>(lengths.size());
  row.mean_chain_length = sum / n;
  row.fraction_broken_at_1 = static_cast<double>(at_one) / n;
  return row;
}

}  // namespace

std::vector<int> reapply_thresholds(const std::vector<ChainRecord>& records, const Thresholds& thresholds) {
  std::vector<int> lengths;
  lengths.reserve(records.size());
  for (const auto& r : records) {
    require_metrics(r);
    lengths.push_back(reapply(r, thresholds));
  }
  return lengths;
}

// "Unbroken" means no step tripped a threshold, which a length of 15 alone
// cannot tell apart from a break at the last step.
std::vector<SweepRow> sweep_thresholds(const std::vector<ChainRecord>& records, const SweepGrid& grid,
                                       Execution execution) {
  grid.validate();
  for (const auto& r : records) require_metrics(r);
  const auto points = grid.points();
  const std::size_t chains = records.size();
  std::vector<int> lengths(points.size() * chains, 0);
  std::vector<char> unbroken(points.size() * chains, 0);

  auto kernel = [&](std::size_t cell) {
    const std::size_t g = cell / chains;
    const std::size_t c = cell % chains;
    const int len = reapply(records[c], points[g]);
    lengths[cell] = len;
    unbroken[cell] = !std::any_of(records[c].steps.begin(), records[c].steps.end(),
                                  [&](const ChainStep& s) { return evaluate_step(s.metrics, points[g]).broken; });
  };
  const std::size_t cells = lengths.size();
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < cells; ++i) kernel(i);
  } else {
    const long n = static_cast<long>(cells);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) kernel(static_cast<std::size_t>(i));
  }

  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < points.size(); ++g) {
    std::vector<int> slice(lengths.begin() + static_cast<std::ptrdiff_t>(g * chains),
                           lengths.begin() + static_cast<std::ptrdiff_t>((g + 1) * chains));
    SweepRow row = summarize(points[g], slice);
    if (chains > 0) {
      const auto first = unbroken.begin() + static_cast<std::ptrdiff_t>(g * chains);
      row.fraction_unbroken =
          static_cast<double>(std::count(first, first + static_cast<std::ptrdiff_t>(chains), 1)) / chains;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> sweep_thresholds(const std::filesystem::path& run_dir, const SweepGrid& grid,
                                       Execution execution) {
  const RunDirectory dir(run_dir);
  auto records = dir.load_chains();
  std::erase_if(records, [](const ChainRecord& r) { return !r.complete; });
  if (records.empty()) throw std::runtime_error("no complete chains stored in " + run_dir.string());
  return sweep_thresholds(records, grid, execution);
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "compat_min,semantic_min,label_min,chains,mean_chain_length,fraction_unbroken,fraction_broken_at_1\n";
  for (const auto& r : rows) {
    out += fixed(r.thresholds.compat_min) + "," + fixed(r.thresholds.semantic_min) + "," +
           fixed(r.thresholds.label_min) + "," + std::to_string(r.chains) + "," + fixed(r.mean_chain_length) + "," +
           fixed(r.fraction_unbroken) + "," + fixed(r.fraction_broken_at_1) + "\n";
  }
  return out;
}

}  // namespace fluidity
