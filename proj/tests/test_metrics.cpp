#include <doctest.h>

#include <cmath>
#include <random>

#include "fluidity/metrics.hpp"
#include "support.hpp"

using namespace fluidity;

namespace {

struct FixtureRow {
  int step;
  StepMetrics metrics;
  bool broken;
};

std::vector<FixtureRow> chain_0045() {
  std::vector<FixtureRow> out;
  for (const auto& row : test::read_csv(test::fixture("chain_0045.csv"))) {
    FixtureRow r;
    r.step = std::stoi(row.at("step"));
    r.metrics.compat_score = std::stod(row.at("compat_score"));
    r.metrics.detector_a_sim = std::stod(row.at("detector_a_sim"));
    r.metrics.detector_b_sim = std::stod(row.at("detector_b_sim"));
    r.metrics.label_semantic_score = std::stod(row.at("label_semantic_score"));
    r.metrics.caption_semantic_score = std::stod(row.at("caption_semantic_score"));
    r.broken = row.at("broken") == "True";
    out.push_back(r);
  }
  return out;
}

// Deterministic pseudo-embedding: hashed random unit-ish vector per string.
Embedding fake_embed(const std::string& s) {
  std::mt19937_64 rng(std::hash<std::string>{}(s));
  std::normal_distribution<double> n(0.0, 1.0);
  Embedding e;
  for (int i = 0; i < 8; ++i) e.vector.push_back(n(rng));
  return e;
}

// Independent restatement of the label similarity rule.
double label_sim_oracle(const std::vector<std::string>& init, const std::vector<std::string>& curr) {
  if (init.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& a : init) {
    double best = 0.0;
    for (const auto& b : curr) {
      if (a == b) {
        best = 1.0;
        break;
      }
      const auto ea = fake_embed(a).vector, eb = fake_embed(b).vector;
      double dot = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i < ea.size(); ++i) {
        dot += ea[i] * eb[i];
        na += ea[i] * ea[i];
        nb += eb[i] * eb[i];
      }
      best = std::max(best, dot / std::sqrt(na * nb));
    }
    sum += best;
  }
  return sum / static_cast<double>(init.size());
}

std::vector<std::string> random_labels(std::mt19937_64& rng, std::size_t max) {
  static const std::vector<std::string> pool = {"truck", "car", "road", "tree", "sign", "person", "wine", "glass"};
  std::vector<std::string> out;
  const std::size_t n = rng() % (max + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = pool[rng() % pool.size()];
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

}  // namespace

TEST_CASE("chain 0045 fixture replays its Broken column and length 4") {
  const auto rows = chain_0045();
  REQUIRE(rows.size() == 16);
  std::vector<BreakageFlags> flags;
  for (const auto& r : rows) {
    if (r.step == 0) continue;  // seed row
    const auto f = evaluate_step(r.metrics, Thresholds{});
    CHECK_MESSAGE(f.broken == r.broken, "step " << r.step);
    flags.push_back(f);
  }
  CHECK(chain_length(flags) == 4);
}

TEST_CASE("evaluate_step on the named 0045 rows") {
  const Thresholds t;
  // Step 1: one detector below 0.5 is not enough.
  auto f = evaluate_step({27.167, 0.123, 0.664, 0.762, 0.789, false}, t);
  CHECK_FALSE(f.broken);
  CHECK_FALSE(f.by_labels);
  // Step 4: both detectors below 0.5.
  f = evaluate_step({25.0439, 0.144, 0.0, 0.621, 0.248, false}, t);
  CHECK(f.broken);
  CHECK(f.by_labels);
  CHECK_FALSE(f.by_semantics);
  CHECK_FALSE(f.by_compat);
  // Step 15: compat alone.
  f = evaluate_step({18.894, 1.0, 1.0, 1.0, 1.0, false}, t);
  CHECK(f.broken);
  CHECK(f.by_compat);
  // Semantics needs both scores low.
  CHECK_FALSE(evaluate_step({30, 1, 1, 0.4, 0.6, false}, t).by_semantics);
  CHECK(evaluate_step({30, 1, 1, 0.4, 0.3, false}, t).by_semantics);
}

TEST_CASE("chain_length edge cases") {
  std::vector<BreakageFlags> none(kMaxChainSteps);
  CHECK(chain_length(none) == 15);
  std::vector<BreakageFlags> first(kMaxChainSteps);
  first[0].broken = true;
  CHECK(chain_length(first) == 1);
  CHECK_THROWS_AS(chain_length(std::vector<BreakageFlags>{}), std::invalid_argument);
  CHECK_THROWS_AS(chain_length(std::vector<BreakageFlags>(16)), std::invalid_argument);
  CHECK(chain_length(std::vector<BreakageFlags>(3), 3) == 3);
}

TEST_CASE("property: raising a threshold never lengthens a chain") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<StepMetrics> steps;
    for (int i = 0; i < kMaxChainSteps; ++i) {
      steps.push_back({10.0 + 30.0 * u(rng), u(rng), u(rng), 2 * u(rng) - 1, 2 * u(rng) - 1, false});
    }
    auto length = [&](const Thresholds& t) {
      std::vector<BreakageFlags> f;
      for (const auto& m : steps) f.push_back(evaluate_step(m, t));
      return chain_length(f);
    };
    const Thresholds base{5.0 + 30.0 * u(rng), 0.05 + 0.9 * u(rng), 0.05 + 0.9 * u(rng)};
    const int l0 = length(base);
    Thresholds up = base;
    up.compat_min += 5.0 * u(rng);
    CHECK(length(up) <= l0);
    up = base;
    up.semantic_min = std::min(0.99, up.semantic_min + 0.2 * u(rng));
    CHECK(length(up) <= l0);
    up = base;
    up.label_min = std::min(0.99, up.label_min + 0.2 * u(rng));
    CHECK(length(up) <= l0);
  }
}

TEST_CASE("label_sim matches an independent restatement") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto init = random_labels(rng, 4);
    const auto curr = random_labels(rng, 4);
    const double got = label_sim(init, curr, fake_embed);
    CHECK(got == doctest::Approx(label_sim_oracle(init, curr)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("label_sim is 1 on supersets and 0 for empty initial labels") {
  CHECK(label_sim({"truck", "road"}, {"road", "car", "truck"}, fake_embed) == 1.0);
  CHECK(label_sim({}, {"truck"}, fake_embed) == 0.0);
  CHECK(label_sim({"truck"}, {}, fake_embed) == 0.0);
  CHECK(label_sim({}, {}, fake_embed) == 0.0);
}

TEST_CASE("compat_score is invariant under positive rescaling") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Embedding a, b;
    for (int i = 0; i < 16; ++i) {
      a.vector.push_back(u(rng));
      b.vector.push_back(u(rng));
    }
    const double base = compat_score(a, b);
    Embedding a2 = a, b2 = b;
    const double ka = 0.01 + 100.0 * std::abs(u(rng)), kb = 0.01 + 100.0 * std::abs(u(rng));
    for (auto& x : a2.vector) x *= ka;
    for (auto& x : b2.vector) x *= kb;
    CHECK(compat_score(a2, b2) == doctest::Approx(base).epsilon(1e-12));
    CHECK(base >= 0.0);
    CHECK(base <= 100.0);
  }
}

TEST_CASE("cosine rejects zero vectors and mismatched dimensions") {
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{1}, std::vector<double>{1, 0}), std::invalid_argument);
  CHECK(cosine_similarity(std::vector<double>{1, 2}, std::vector<double>{2, 4}) == doctest::Approx(1.0));
}

TEST_CASE("caption_pair_scores through the mock embedder") {
  test::MockClient mock;
  const auto suite = make_mock_suite(MockOntology::default_ontology(), 0.0, 1);
  SimilarityContext ctx(mock.client, suite.embedder);
  const Caption a{"a red truck on a road", "c", 0};
  const auto same = caption_pair_scores(a, a, ctx);
  CHECK(same.caption_semantic == doctest::Approx(1.0));
  CHECK(same.label_semantic == doctest::Approx(1.0));
  CHECK_FALSE(same.labels_missing);
  const auto other = caption_pair_scores(a, {"a glass of wine near a bottle", "c", 1}, ctx);
  CHECK(other.caption_semantic < 0.5);
  const auto empty = caption_pair_scores(a, {"the of and", "c", 1}, ctx);
  CHECK(empty.labels_missing);
  CHECK(empty.label_semantic == 0.0);
}
