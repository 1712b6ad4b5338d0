#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluidity/backend.hpp"
#include "fluidity/domain.hpp"
#include "fluidity/run_dir.hpp"

namespace fluidity {

struct ExperimentConfig {
  std::string run_id = "run";
  std::string seed_set_id = "seeds";
  std::vector<SeedImage> seed_set;
  BackendDescriptor image_generator;
  BackendDescriptor captioner;
  std::array<BackendDescriptor, 2> labelers;
  BackendDescriptor embedder;
  Thresholds thresholds;
  int max_steps = kMaxChainSteps;
  int workers = 1;
  std::uint64_t rng_seed = 0;

  Combo combo() const { return {image_generator.backend_id, captioner.backend_id}; }
  std::vector<BackendDescriptor> backends() const;
  /// Throws std::invalid_argument on a role mismatch, bad step count,
  /// duplicate seed ids or invalid thresholds.
  void validate() const;
};

/// Image bytes plus a media type guessed from the file extension.
Image load_image(const std::filesystem::path& path);

/// Fewer qualifying seed images than requested.
class InsufficientSeeds : public std::runtime_error {
 public:
  InsufficientSeeds(std::size_t found, std::size_t wanted);
  std::size_t found() const { return found_; }

 private:
  std::size_t found_;
};

/// Labels treated as "prominently features a person".
bool is_face_class(std::string_view label);

/// Samples candidates from `source_dir` in seeded random order and keeps an
/// image iff the labeler finds at least one label, the top label is not
/// face-class and no face-class label is among the top 3.
/// Throws std::runtime_error("no candidates") for an empty directory.
std::vector<SeedImage> ingest_seed_dataset(const std::filesystem::path& source_dir, std::size_t target_count,
                                           const BackendDescriptor& labeler, const BackendClient& client,
                                           std::uint64_t rng_seed);

/// A chain stopped early. `partial` holds every step finished before the failure.
class ChainError : public std::runtime_error {
 public:
  ChainError(int step, const std::string& message, ChainRecord partial)
      : std::runtime_error(message), step_(step), partial_(std::move(partial)) {}
  int step() const { return step_; }
  const ChainRecord& partial() const { return partial_; }

 private:
  int step_;
  ChainRecord partial_;
};

/// Runs one chain. All max_steps images are generated even after a break.
/// When `run_dir` is given, generated images are stored there. A partial
/// record (complete == false) continues from its last stored step.
ChainRecord run_chain(const SeedImage& seed, const ExperimentConfig& config, const BackendClient& client,
                      const RunDirectory* run_dir = nullptr, const ChainRecord* resume_from = nullptr);

enum class Execution { serial, parallel };

struct ExperimentOptions {
  Execution execution = Execution::parallel;
  /// Stop after this many chains have run in this invocation (simulates an interrupted run).
  std::optional<std::size_t> stop_after;
  std::function<void(const std::string&)> log;
};

struct ExperimentResult {
  RunManifest manifest;
  LengthDistribution distribution;
  std::size_t executed = 0;
};

/// Runs every seed not yet in the manifest's completed set and persists each
/// chain. An existing manifest must describe the same experiment.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                                const BackendClient& client, const ExperimentOptions& options = {});

/// Chain-length histogram of the complete chains stored in a run directory.
LengthDistribution load_distribution(const RunDirectory& run_dir);
/// Chain lengths of the complete chains, in seed-id order.
std::vector<int> load_lengths(const RunDirectory& run_dir);

inline constexpr std::string_view kControlGeneratorId = "control";

/// Control chains from 15 images of one category: each shuffle permutes the
/// images and treats them as the generated images, the first of the
/// permutation doubling as the seed. Seeds are named "<category>-<shuffle>".
std::vector<ChainRecord> build_control_chains(const std::vector<std::filesystem::path>& category_images,
                                              const std::string& category, int shuffles,
                                              const ExperimentConfig& config, const BackendClient& client,
                                              Execution execution = Execution::parallel);

}  // namespace fluidity
