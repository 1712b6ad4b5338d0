#include <doctest.h>

#include <random>

#include "fluidity/codec.hpp"
#include "fluidity/metrics.hpp"
#include "support.hpp"

using namespace fluidity;

namespace {

// Random record with consistent flags and chain_length.
ChainRecord random_record(std::mt19937_64& rng, int steps = kMaxChainSteps) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> compat(10.0, 40.0);
  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  ChainRecord r;
  r.seed = {"s" + std::to_string(rng() % 10000), "images/x.png", "truck"};
  r.seed_caption = {"a red truck, \"quoted\" \\ and ü", "cap", 0};
  r.seed_labels_a = {"det-a", {"truck", "road"}};
  r.seed_labels_b = {"det-b", {}};
  r.combo = {"gen", "cap"};
  r.thresholds = {20.0, 0.5, 0.5};
  r.rng_seed = rng();
  std::vector<BreakageFlags> flags;
  for (int i = 1; i <= steps; ++i) {
    ChainStep s;
    s.index = i;
    s.caption = {"caption number " + std::to_string(i), "cap", i};
    s.image_path = "images/" + r.seed.id + "/" + std::to_string(i) + ".png";
    s.labels_a = {"det-a", {"truck"}};
    s.labels_b = {"det-b", {}};
    s.metrics = {compat(rng), unit(rng), unit(rng), signed_unit(rng), signed_unit(rng), rng() % 7 == 0};
    s.flags = evaluate_step(s.metrics, r.thresholds);
    flags.push_back(s.flags);
    r.steps.push_back(s);
  }
  r.chain_length = chain_length(flags);
  r.complete = steps == kMaxChainSteps;
  if (!r.complete) r.chain_length = 0;
  return r;
}

bool has_violation(const ValidationResult& v, std::string_view text) {
  for (const auto& s : v.violations) {
    if (s.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate_chain_record accepts a consistent chain") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto r = random_record(rng);
    const auto v = validate_chain_record(r);
    CHECK_MESSAGE(v.ok(), (v.violations.empty() ? "" : v.violations.front()));
  }
}

TEST_CASE("validate_chain_record flags 16 generated steps") {
  std::mt19937_64 rng(2);
  auto r = random_record(rng);
  ChainStep extra = r.steps.back();
  extra.index = 16;
  extra.caption.step_index = 16;
  r.steps.push_back(extra);
  CHECK(has_violation(validate_chain_record(r), "step count exceeds 15"));
}

TEST_CASE("validate_chain_record recomputes the first broken index") {
  std::mt19937_64 rng(3);
  auto r = random_record(rng);
  // Force the first break at step 4, then claim 7.
  for (auto& s : r.steps) {
    s.metrics.compat_score = s.index == 4 ? 5.0 : 30.0;
    s.metrics.detector_a_sim = 1.0;
    s.metrics.label_semantic_score = 1.0;
    s.flags = evaluate_step(s.metrics, r.thresholds);
  }
  r.chain_length = 4;
  CHECK(validate_chain_record(r).ok());
  r.chain_length = 7;
  CHECK(has_violation(validate_chain_record(r), "chain_length mismatch"));
}

TEST_CASE("validate_chain_record reports each broken invariant") {
  std::mt19937_64 rng(4);
  auto r = random_record(rng);
  r.steps[2].flags.broken = !r.steps[2].flags.broken;
  r.steps[5].metrics.detector_a_sim = 1.5;
  r.steps[6].labels_a.labels = {"x", "x"};
  r.seed_caption.step_index = 2;
  const auto v = validate_chain_record(r);
  CHECK(has_violation(v, "step 3: broken flag inconsistent"));
  CHECK(has_violation(v, "step 6: detector_a_sim out of range"));
  CHECK(has_violation(v, "step 7: label set contains duplicates"));
  CHECK(has_violation(v, "seed caption step_index must be 0"));
}

TEST_CASE("records round-trip and encode canonically") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto r = random_record(rng, 1 + static_cast<int>(rng() % kMaxChainSteps));
    const std::string bytes = encode_record(r);
    const ChainRecord back = decode_record(bytes);
    CHECK(back == r);
    CHECK(encode_record(back) == bytes);
  }
}

TEST_CASE("truncated record names the field being read") {
  std::mt19937_64 rng(6);
  const std::string bytes = encode_record(random_record(rng));
  const auto cut = bytes.find("\"steps\"");
  REQUIRE(cut != std::string::npos);
  try {
    decode_record(bytes.substr(0, cut + 40));
    FAIL("decode should fail");
  } catch (const DecodeError& e) {
    CHECK(e.field().starts_with("/steps"));
    CHECK(e.byte_offset() != std::string::npos);
  }
}

TEST_CASE("record with a missing field names it") {
  std::mt19937_64 rng(7);
  auto j = nlohmann::json::parse(encode_record(random_record(rng)));
  j.erase("chain_length");
  try {
    decode_record(j.dump());
    FAIL("decode should fail");
  } catch (const DecodeError& e) {
    CHECK(e.field() == "/chain_length");
    CHECK(std::string(e.what()).find("missing field") != std::string::npos);
  }
}

TEST_CASE("manifest with 1000 completed ids round-trips with set semantics") {
  std::mt19937_64 rng(8);
  RunManifest m;
  m.run_id = "r";
  m.combo = {"gen", "cap"};
  m.seed_set_id = "seeds";
  m.rng_seed = 99;
  m.failed_chains = {{"0003", 4, "backend error: boom"}};
  m.backends = {make_mock_suite(MockOntology::default_ontology(), 0.25, 99).image_generator};
  std::vector<std::string> ids;
  for (int i = 0; i < 1000; ++i) ids.push_back("id" + std::to_string(rng()));
  for (const auto& id : ids) m.completed_chain_ids.insert(id);
  const auto back = decode_manifest(encode_manifest(m));
  CHECK(back == m);
  CHECK(back.completed_chain_ids.size() == m.completed_chain_ids.size());

  // Insertion order does not matter.
  RunManifest shuffled = m;
  shuffled.completed_chain_ids.clear();
  std::shuffle(ids.begin(), ids.end(), rng);
  for (const auto& id : ids) shuffled.completed_chain_ids.insert(id);
  CHECK(encode_manifest(shuffled) == encode_manifest(m));
}

TEST_CASE("seed sets round-trip") {
  std::vector<SeedImage> seeds = {{"0001", "a/0001.png", "truck"}, {"0002", "a/0002.png", std::nullopt}};
  CHECK(decode_seed_set(encode_seed_set(seeds)) == seeds);
  CHECK_THROWS_AS(decode_seed_set(R"({"format":"other","seeds":[]})"), DecodeError);
}

TEST_CASE("property: broken at step i implies chain_length <= i, flags recomputable") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_record(rng);
    for (const auto& s : r.steps) {
      if (s.flags.broken) CHECK(r.chain_length <= s.index);
      CHECK(evaluate_step(s.metrics, r.thresholds) == s.flags);
    }
  }
}

TEST_CASE("thresholds validate their ranges") {
  CHECK_NOTHROW(Thresholds{}.validate());
  CHECK_THROWS(Thresholds{0.0, 0.5, 0.5}.validate());
  CHECK_THROWS(Thresholds{20.0, 1.0, 0.5}.validate());
  CHECK_THROWS(Thresholds{20.0, 0.5, 0.0}.validate());
}

TEST_CASE("run directory layout") {
  test::TempDir tmp("layout");
  const RunDirectory dir(tmp.path() / "runs" / "r1");
  CHECK(dir.manifest_path() == tmp.path() / "runs" / "r1" / "manifest.json");
  CHECK(dir.chain_path("0045") == tmp.path() / "runs" / "r1" / "chains" / "0045.json");
  const std::string rel = dir.save_image("0045", 3, "scene", "scene v1\n");
  CHECK(rel == "images/0045/3.scene");
  CHECK(read_file(dir.root() / rel) == "scene v1\n");
  CHECK_FALSE(dir.has_manifest());
  CHECK_FALSE(dir.load_chain("0045").has_value());
}
