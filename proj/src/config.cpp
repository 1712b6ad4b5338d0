#include "fluidity/config.hpp"

#include <set>
#include <sstream>

#include "fluidity/codec.hpp"
#include "fluidity/run_dir.hpp"

namespace fluidity {

using nlohmann::json;

void apply_mock_suite(ExperimentConfig& config, const MockSuite& suite) {
  config.image_generator = suite.image_generator;
  config.captioner = suite.captioner;
  config.labelers = {suite.labeler_a, suite.labeler_b};
  config.embedder = suite.embedder;
}

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir,
                                             bool require_seed_set) {
  if (!j.is_object()) throw DecodeError("/", std::string::npos, "config must be a JSON object");
  ExperimentConfig c;
  auto field = [](const json& obj, const std::string& path, const char* key, auto fallback) {
    if (!obj.contains(key)) return fallback;
    try {
      return obj.at(key).get<decltype(fallback)>();
    } catch (const json::type_error&) {
      throw DecodeError(path + "/" + key, std::string::npos, "wrong type at '" + path + "/" + key + "'");
    }
  };
  c.run_id = field(j, "", "run_id", c.run_id);
  c.rng_seed = field(j, "", "rng_seed", c.rng_seed);
  c.workers = field(j, "", "workers", c.workers);
  c.max_steps = field(j, "", "max_steps", c.max_steps);
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    if (!t.is_object()) throw DecodeError("/thresholds", std::string::npos, "thresholds must be an object");
    c.thresholds.compat_min = field(t, "/thresholds", "compat_min", c.thresholds.compat_min);
    c.thresholds.semantic_min = field(t, "/thresholds", "semantic_min", c.thresholds.semantic_min);
    c.thresholds.label_min = field(t, "/thresholds", "label_min", c.thresholds.label_min);
  }

  if (j.contains("seed_set")) {
    const std::filesystem::path seeds = base_dir / field(j, "", "seed_set", std::string());
    c.seed_set = decode_seed_set(read_file(seeds));
    for (auto& s : c.seed_set) {
      if (s.path.is_relative()) s.path = seeds.parent_path() / s.path;
    }
    c.seed_set_id = seeds.stem().string();
  } else if (require_seed_set) {
    throw DecodeError("/seed_set", std::string::npos, "missing field '/seed_set'");
  }
  c.seed_set_id = field(j, "", "seed_set_id", c.seed_set_id);

  const bool mock = j.contains("mock_drift");
  if (mock) {
    const double drift = field(j, "", "mock_drift", 0.0);
    apply_mock_suite(c, make_mock_suite(MockOntology::default_ontology(), drift, c.rng_seed));
    // Runs at different drifts are different generators as far as analysis is concerned.
    std::ostringstream id;
    id << "mock-generator-d" << drift;
    c.image_generator.backend_id = field(j, "", "mock_generator_id", id.str());
  }
  auto descriptor = [&](const char* key, BackendDescriptor& target) {
    if (j.contains(key)) {
      target = descriptor_from_json(j.at(key), std::string("/") + key);
    } else if (!mock) {
      throw DecodeError(std::string("/") + key, std::string::npos, std::string("missing field '/") + key + "'");
    }
  };
  descriptor("image_generator", c.image_generator);
  descriptor("captioner", c.captioner);
  descriptor("embedder", c.embedder);
  if (j.contains("labelers")) {
    const json& l = j.at("labelers");
    if (!l.is_array() || l.size() != 2) {
      throw DecodeError("/labelers", std::string::npos, "exactly two labelers are required");
    }
    c.labelers = {descriptor_from_json(l[0], "/labelers/0"), descriptor_from_json(l[1], "/labelers/1")};
  } else if (!mock) {
    throw DecodeError("/labelers", std::string::npos, "missing field '/labelers'");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, bool require_seed_set) {
  return experiment_config_from_json(parse_tracked(read_file(path)), path.parent_path(), require_seed_set);
}

std::shared_ptr<MockService> mount_mocks(BackendClient& client, const ExperimentConfig& config,
                                         const MockOntology& ontology, const MockGeometry& geometry) {
  std::set<std::string> names;
  for (const auto& d : config.backends()) {
    if (d.is_mock()) names.insert(d.endpoint.substr(5));
  }
  if (names.empty()) return nullptr;
  auto service = std::make_shared<MockService>(ontology, geometry);
  for (const auto& n : names) client.mount(n, service);
  return service;
}

}  // namespace fluidity
