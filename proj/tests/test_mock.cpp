#include <doctest.h>

#include "fluidity/metrics.hpp"
#include "support.hpp"

using namespace fluidity;
using nlohmann::json;

namespace {

json request(const std::string& input, json params = json::object(), std::uint64_t seed = 1) {
  return {{"input", input}, {"params", params}, {"seed", seed}};
}

std::string error_kind(const json& reply) {
  return reply.value("ok", true) ? "" : reply["error"]["kind"].get<std::string>();
}

}  // namespace

TEST_CASE("mock embedding geometry: identical 1, same category 0.6, across categories 0") {
  MockService mock;
  const auto& onto = mock.ontology();
  for (const auto& [cat_a, members_a] : onto.categories) {
    for (const auto& a : members_a) {
      const auto ea = mock.embed_text(a);
      CHECK(cosine_similarity(ea, mock.embed_text(a)) == doctest::Approx(1.0).epsilon(1e-12));
      for (const auto& [cat_b, members_b] : onto.categories) {
        for (const auto& b : members_b) {
          if (a == b) continue;
          const double c = cosine_similarity(ea, mock.embed_text(b));
          if (cat_a == cat_b) {
            CHECK(std::abs(c - 0.6) <= 1e-9);
          } else {
            CHECK(std::abs(c) <= 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("mock ontology validation") {
  CHECK_NOTHROW(MockOntology::default_ontology().validate());
  auto dup = MockOntology::default_ontology();
  dup.categories.begin()->second.push_back(std::next(dup.categories.begin())->second.front());
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  auto open = MockOntology::default_ontology();
  open.adjacency["truck"].push_back("spaceship");
  CHECK_THROWS_AS(open.validate(), std::invalid_argument);
  auto self = MockOntology::default_ontology();
  self.adjacency["truck"].push_back("truck");
  CHECK_THROWS_AS(self.validate(), std::invalid_argument);
}

TEST_CASE("scenes serialize and parse") {
  Scene s{{"truck", "road"}, {"red"}, {"large", "parked"}};
  CHECK(Scene::parse(s.serialize()) == s);
  CHECK_THROWS_AS(Scene::parse("not a scene"), std::invalid_argument);
  CHECK_THROWS_AS(Scene::parse("scene v1\ncolour red\n"), std::invalid_argument);
}

TEST_CASE("mock roles are deterministic") {
  MockService a, b;
  const Scene s{{"truck", "road"}, {"red"}, {"large"}};
  CHECK(a.caption_for(s, 50) == b.caption_for(s, 50));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(a.generate("a red truck on a road", 0.5, 0.5, seed) == b.generate("a red truck on a road", 0.5, 0.5, seed));
  }
  const json r = request(base64_encode(s.serialize()), {{"media_type", "text/x-scene"}});
  CHECK(a.post("/caption", r) == b.post("/caption", r));
  CHECK(a.post("/labels", r) == b.post("/labels", r));
  CHECK(a.embed_image(s.to_image()) == b.embed_image(s.to_image()));
}

TEST_CASE("drift 0 keeps the subject, drift 1 always swaps it") {
  MockService mock;
  const auto& onto = mock.ontology();
  for (const auto& subject : onto.concepts()) {
    const std::string prompt = "a " + subject;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CHECK(mock.generate(prompt, 0.0, 0.0, seed).objects.front() == subject);
      const auto moved = mock.generate(prompt, 1.0, 0.0, seed);
      CHECK(moved.objects.front() != subject);
      const auto& adj = onto.adjacency.at(subject);
      CHECK(std::find(adj.begin(), adj.end(), moved.objects.front()) != adj.end());
    }
  }
}

TEST_CASE("caption then generate at drift 0 is the identity on objects and attributes") {
  MockService mock;
  const auto scenes = make_mock_seed_scenes(mock.ontology(), 100, 5);
  for (const auto& s : scenes) {
    const auto back = mock.generate(mock.caption_for(s, 50), 0.0, 0.0, 3);
    CHECK(back.objects == s.objects);
    CHECK(back.attributes == s.attributes);
    CHECK(back.details.empty());  // details are rendered in captions but never drawn
  }
}

TEST_CASE("labelers: all objects versus primary only") {
  MockService mock;
  const Scene s{{"truck", "road", "truck"}, {}, {}};
  CHECK(mock.labels_for(s, "objects") == std::vector<std::string>{"truck", "road"});
  CHECK(mock.labels_for(s, "primary") == std::vector<std::string>{"truck"});
  CHECK(mock.labels_for(Scene{}, "objects").empty());
}

TEST_CASE("mock protocol errors fall into the typed taxonomy") {
  MockService mock;
  const std::string scene = base64_encode(Scene{{"truck"}, {}, {}}.serialize());
  CHECK(error_kind(mock.post("/generate", request("  "))) == "bad_request");
  CHECK(error_kind(mock.post("/caption", request("@@@", {{"media_type", "text/x-scene"}}))) == "bad_request");
  CHECK(error_kind(mock.post("/caption", request(scene, {{"media_type", "image/png"}}))) == "unsupported_media");
  CHECK(error_kind(mock.post("/caption", request(base64_encode("scene v1\n"), {{"media_type", "text/x-scene"}}))) ==
        "empty_scene");
  CHECK(error_kind(mock.post("/embed", request(""))) == "bad_request");
  CHECK(error_kind(mock.post("/embed", request("x", {{"modality", "audio"}}))) == "bad_request");
  CHECK(error_kind(mock.post("/generate", request("a truck", {{"drift", "2"}}))) == "bad_request");
  CHECK(error_kind(mock.post("/nowhere", request("x"))) == "not_found");
  CHECK(error_kind(mock.post("/caption", json{{"input", scene}})) == "bad_request");
  // Blank images have no labels, which is a result, not an error.
  const auto blank = mock.post("/labels", request(base64_encode("scene v1\n"), {{"media_type", "text/x-scene"}}));
  CHECK(blank == json{{"ok", true}, {"result", json::array()}});
}

TEST_CASE("call counters track routes") {
  MockService mock;
  mock.post("/health", json::object());
  mock.post("/generate", request("a truck"));
  mock.post("/generate", request("a truck"));
  CHECK(mock.calls() == 3);
  CHECK(mock.calls("/generate") == 2);
  mock.reset_counts();
  CHECK(mock.calls() == 0);
}

TEST_CASE("default drift and seed salt") {
  MockService mock;
  mock.set_default_drift(1.0);
  const auto r = mock.post("/generate", request("a truck"));
  const auto scene = Scene::parse(base64_decode(r["result"]["data"].get<std::string>()));
  CHECK(scene.objects.front() != "truck");
  CHECK_THROWS_AS(mock.set_default_drift(1.5), std::invalid_argument);

  MockService plain, salted;
  salted.set_seed_salt(77);
  int differ = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto p = plain.generate("a red truck on a road", 0.5, 0.5, s);
    const auto q = Scene::parse(base64_decode(
        salted.post("/generate", request("a red truck on a road", {{"drift", "0.5"}, {"attribute_drift", "0.5"}}, s))
            ["result"]["data"]
            .get<std::string>()));
    differ += p == q ? 0 : 1;
  }
  CHECK(differ > 0);
}

TEST_CASE("mock suite descriptors") {
  const auto suite = make_mock_suite(MockOntology::default_ontology(), 0.2, 9, "lab");
  CHECK(suite.image_generator.endpoint == "mock:lab");
  CHECK(suite.image_generator.role == Role::image_generator);
  CHECK(suite.captioner.role == Role::captioner);
  CHECK(suite.labeler_a.role == Role::labeler);
  CHECK(suite.embedder.role == Role::embedder);
  CHECK(std::stod(suite.image_generator.params.at("drift")) == 0.2);
  CHECK_THROWS_AS(make_mock_suite(MockOntology::default_ontology(), -0.1, 9), std::invalid_argument);
}

TEST_CASE("seed and control scene recipes") {
  const auto& onto = MockOntology::default_ontology();
  const auto seeds = make_mock_seed_scenes(onto, 200, 4, 0.25);
  std::size_t people = 0;
  for (const auto& s : seeds) {
    REQUIRE(s.objects.size() >= 2);
    CHECK(onto.category_of(s.objects[0]) != onto.category_of(s.objects[1]));
    people += s.objects[0] == "person" ? 1 : 0;
  }
  // Bernoulli per scene: 50 expected, sd about 6.
  CHECK(people >= 30);
  CHECK(people <= 70);
  for (const auto& s : make_mock_seed_scenes(onto, 50, 4, 1.0)) CHECK(s.objects[0] == "person");
  for (const auto& s : make_mock_seed_scenes(onto, 50, 4, 0.0)) CHECK(s.objects[0] != "person");
  CHECK(make_mock_seed_scenes(onto, 50, 4) == make_mock_seed_scenes(onto, 50, 4));

  const auto control = make_mock_control_scenes(onto, "truck", 15, 2);
  REQUIRE(control.size() == 15);
  for (const auto& s : control) CHECK(s.objects.front() == "truck");
}
