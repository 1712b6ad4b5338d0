#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "fluidity/engine.hpp"
#include "fluidity/mock.hpp"

namespace fluidity {

/// Experiment config file (JSON):
///
///   {
///     "run_id": "sdxl-blip",              optional, default "run"
///     "seed_set": "seeds.json",           seed-set file, relative to the config
///     "seed_set_id": "coco-1000",         optional, default: seed-set file stem
///     "rng_seed": 7, "workers": 4, "max_steps": 15,
///     "thresholds": {"compat_min": 20, "semantic_min": 0.5, "label_min": 0.5},
///     "mock_drift": 0.2,                  optional: missing backends become the mock suite,
///     "mock_generator_id": "...",         with generator id "mock-generator-d<drift>" unless given
///     "image_generator": {descriptor}, "captioner": {descriptor},
///     "labelers": [{descriptor}, {descriptor}], "embedder": {descriptor}
///   }
///
/// Threshold keys that are absent keep their defaults.
/// `require_seed_set` is false for control runs, which bring their own images.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                             bool require_seed_set = true);
ExperimentConfig load_experiment_config(const std::filesystem::path& path, bool require_seed_set = true);

/// Mounts one shared mock service under every "mock:<name>" endpoint the
/// config uses and returns it (null when the config has no mock backends).
std::shared_ptr<MockService> mount_mocks(BackendClient& client, const ExperimentConfig& config,
                                         const MockOntology& ontology = MockOntology::default_ontology(),
                                         const MockGeometry& geometry = {});

/// Mock suite wired into a config: generator, captioner, labelers, embedder.
void apply_mock_suite(ExperimentConfig& config, const MockSuite& suite);

}  // namespace fluidity
