#include <doctest.h>

#include <random>

#include "fluidity/report.hpp"
#include "support.hpp"

using namespace fluidity;
using nlohmann::json;

namespace {

std::vector<std::string> sorted_names(const std::vector<std::filesystem::path>& files) {
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(f.filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

// Shared small stored run, built once.
const std::filesystem::path& stored_run() {
  static test::TempDir tmp("stored");
  static const bool built = [] {
    const auto config = test::mock_config(test::mock_seed_set(tmp / "seeds", 40, 31), 0.3, 31);
    test::MockClient mock;
    run_experiment(config, tmp / "run", mock.client);
    return true;
  }();
  (void)built;
  static const auto path = tmp / "run";
  return path;
}

}  // namespace

TEST_CASE("box summary of a hand sample") {
  const std::vector<int> x = {15, 3, 7, 15, 7};
  const auto b = box_summary({"g", "c"}, x);
  CHECK(b.n == 5);
  CHECK(b.min == 3.0);
  CHECK(b.q1 == 7.0);
  CHECK(b.median == 7.0);
  CHECK(b.q3 == 15.0);
  CHECK(b.max == 15.0);
  const std::vector<double> s = {1, 2, 3, 4};
  CHECK(quantile_linear(s, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_linear(s, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS(box_summary({"g", "c"}, std::vector<int>{}));
}

TEST_CASE("one run yields five CSV files and two SVG files") {
  test::TempDir out("report");
  const auto bundle = emit_report({stored_run()}, {}, 0.05, out.path());
  CHECK(bundle.files.size() == 7);
  int csv = 0, svg = 0;
  for (const auto& e : std::filesystem::directory_iterator(out.path())) {
    csv += e.path().extension() == ".csv" ? 1 : 0;
    svg += e.path().extension() == ".svg" ? 1 : 0;
  }
  CHECK(csv == 5);
  CHECK(svg == 2);
  for (const auto& f : bundle.files) {
    if (f.extension() == ".svg") {
      const auto text = read_file(f);
      CHECK(text.find("<svg") != std::string::npos);
      CHECK(text.find("</svg>") != std::string::npos);
    }
  }
  CHECK(bundle.comparisons.empty());
  REQUIRE(bundle.scale.size() == 1);
}

TEST_CASE("report CSVs round-trip the numbers at 6 decimals") {
  test::TempDir out("roundtrip");
  emit_report({stored_run()}, {}, 0.05, out.path());
  const auto sample = load_length_sample(stored_run());
  const auto dist = histogram(sample.lengths, sample.combo);

  const auto hist = test::read_csv(out / ("histogram_" + combo_slug(sample.combo) + ".csv"));
  REQUIRE(hist.size() == 15);
  std::int64_t total = 0;
  for (const auto& row : hist) {
    const int bin = std::stoi(row.at("bin"));
    CHECK(std::stoll(row.at("count")) == dist.count(bin));
    CHECK(std::abs(std::stod(row.at("frequency")) - static_cast<double>(dist.count(bin)) / dist.n) <= 5e-7);
    total += std::stoll(row.at("count"));
  }
  CHECK(total == 40);

  const auto scale = test::read_csv(out / "fluidity_scale.csv");
  REQUIRE(scale.size() == 1);
  CHECK(std::abs(std::stod(scale[0].at("kl_divergence")) - kl_to_uniform(dist)) <= 5e-7);

  const auto stats = test::read_csv(out / "stats.csv");
  REQUIRE(stats.size() == 1);
  CHECK(std::abs(std::stod(stats[0].at("mean_chain_length")) - dist.mean()) <= 5e-7);
  CHECK(stats[0].at("n") == "40");

  const auto box = test::read_csv(out / "box_summary.csv");
  REQUIRE(box.size() == 1);
  const auto b = box_summary(sample.combo, sample.lengths);
  CHECK(std::abs(std::stod(box[0].at("median")) - b.median) <= 5e-7);
  CHECK(fixed(1.0 / 3.0) == "0.333333");
  CHECK(fixed(2.5, 0) == "2");
}

TEST_CASE("report emission is idempotent and byte-identical") {
  test::TempDir a("idem-a"), b("idem-b");
  // A second "run" and a control so that comparisons are populated.
  auto sample = load_length_sample(stored_run());
  LengthSample other{{"other-gen", sample.combo.captioner_id}, {}};
  LengthSample control{{"control", sample.combo.captioner_id}, {}};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) {
    other.lengths.push_back(1 + static_cast<int>(rng() % 15));
    control.lengths.push_back(i % 4 == 0 ? 12 : 15);
  }
  const auto first = emit_report({sample, other}, {control}, 0.05, a.path());
  const auto second = emit_report({other, sample}, {control}, 0.05, b.path());
  emit_report({sample, other}, {control}, 0.05, a.path());
  REQUIRE(sorted_names(first.files) == sorted_names(second.files));
  for (const auto& f : first.files) CHECK(read_file(f) == read_file(b.path() / f.filename()));
  // Two runs against the control plus the two generators under one captioner.
  CHECK(first.comparisons.size() == 3);
  const auto rows = test::read_csv(a / "comparisons.csv");
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.at("threshold") == fixed(0.05 / 3));
    CHECK(r.at("p_value").size() == 6);  // 0.xxxx
  }
  CHECK_THROWS_AS(emit_report({sample, sample}, {}, 0.05, a.path()), std::invalid_argument);
}

TEST_CASE("sweep at the default thresholds reproduces the stored chain lengths") {
  const auto records = RunDirectory(stored_run()).load_chains();
  std::vector<int> stored;
  for (const auto& r : records) stored.push_back(r.chain_length);
  CHECK(reapply_thresholds(records, Thresholds{}) == stored);

  const SweepGrid grid{{0.25, 0.5, 0.75}, {20.0}, {0.5}};
  const auto rows = sweep_thresholds(stored_run(), grid);
  REQUIRE(rows.size() == 3);
  const auto& mid = rows[1];
  CHECK(mid.thresholds == Thresholds{});
  const auto dist = histogram(stored);
  CHECK(mid.mean_chain_length == doctest::Approx(dist.mean()).epsilon(1e-12));
  // A length of 15 can still mean a break at the last step.
  std::size_t unbroken = 0;
  for (const auto& r : records) {
    bool any = false;
    for (const auto& f : r.flags()) any = any || f.broken;
    unbroken += any ? 0 : 1;
  }
  CHECK(mid.fraction_unbroken == doctest::Approx(static_cast<double>(unbroken) / 40.0));
  CHECK(mid.fraction_broken_at_1 == doctest::Approx(static_cast<double>(dist.count(1)) / 40.0));
  // Looser semantics never shortens chains, stricter never lengthens them.
  CHECK(rows[0].mean_chain_length >= mid.mean_chain_length);
  CHECK(rows[2].mean_chain_length <= mid.mean_chain_length);
  CHECK(sweep_thresholds(records, grid, Execution::serial).size() == 3);
  const auto serial = sweep_thresholds(records, grid, Execution::serial);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(serial[i].mean_chain_length == rows[i].mean_chain_length);

  const auto csv = sweep_csv(rows);
  CHECK(test::read_csv_text(csv).size() == 3);
}

TEST_CASE("sweep grid parsing") {
  const auto g = sweep_grid_from_json(json::parse(R"({"semantic":[0.25,0.5,0.75]})"));
  CHECK(g.semantic_values == std::vector<double>{0.25, 0.5, 0.75});
  CHECK(g.compat_values == std::vector<double>{20.0});
  CHECK(g.label_values == std::vector<double>{0.5});
  CHECK(g.points().size() == 3);
  const auto full = sweep_grid_from_json(json::parse(R"({"semantic":[0.5],"compat":[15,20,25],"label":[0.4,0.6]})"));
  CHECK(full.points().size() == 6);
  CHECK_THROWS_AS(sweep_grid_from_json(json::parse(R"({"semantic":[0.75,0.25]})")), std::invalid_argument);
  CHECK_THROWS_AS(sweep_grid_from_json(json::parse(R"({"semantic":[]})")), std::invalid_argument);
  CHECK_THROWS_AS(sweep_grid_from_json(json::parse(R"({"semantic":"0.5"})")), std::invalid_argument);
  CHECK_THROWS_AS(sweep_grid_from_json(json::parse(R"([0.5])")), std::invalid_argument);
}

TEST_CASE("combo slugs are filesystem safe") {
  const auto slug = combo_slug({"Stable Diffusion/2.1", "BLIP:large"});
  CHECK(slug.find('/') == std::string::npos);
  CHECK(slug.find(':') == std::string::npos);
  CHECK(slug.find(' ') == std::string::npos);
  CHECK(combo_slug({"a", "b"}) != combo_slug({"a b", ""}));
}
