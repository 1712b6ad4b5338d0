#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fluidity/descriptor.hpp"

namespace fluidity {

/// Generated images per chain. Captions per chain are one more (the seed caption).
inline constexpr int kMaxChainSteps = 15;

struct SeedImage {
  std::string id;
  std::filesystem::path path;
  std::optional<std::string> category_label;

  friend bool operator==(const SeedImage&, const SeedImage&) = default;
};

struct Caption {
  std::string text;
  std::string generator_id;
  int step_index = 0;  // 0 is the seed caption

  friend bool operator==(const Caption&, const Caption&) = default;
};

struct LabelSet {
  std::string detector_id;
  std::vector<std::string> labels;  // detector confidence order

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

/// Raw per-step scores, always persisted so thresholds can be re-applied later.
struct StepMetrics {
  double compat_score = 0.0;            // 0..100
  double detector_a_sim = 0.0;          // 0..1
  double detector_b_sim = 0.0;          // 0..1
  double label_semantic_score = 0.0;    // -1..1
  double caption_semantic_score = 0.0;  // -1..1
  bool caption_labels_missing = false;  // keyword extraction found nothing for one caption

  friend bool operator==(const StepMetrics&, const StepMetrics&) = default;
};

struct BreakageFlags {
  bool by_compat = false;
  bool by_semantics = false;
  bool by_labels = false;
  bool broken = false;

  friend bool operator==(const BreakageFlags&, const BreakageFlags&) = default;
};

struct Thresholds {
  double compat_min = 20.0;
  double semantic_min = 0.5;
  double label_min = 0.5;

  /// Throws std::invalid_argument when a cut-off is out of range.
  void validate() const;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct Combo {
  std::string image_generator_id;
  std::string captioner_id;

  std::string key() const { return image_generator_id + "+" + captioner_id; }

  friend auto operator<=>(const Combo&, const Combo&) = default;
};

struct ChainStep {
  int index = 0;  // generated image number, 1-based
  Caption caption;
  std::string image_path;  // relative to the run directory
  LabelSet labels_a;
  LabelSet labels_b;
  StepMetrics metrics;
  BreakageFlags flags;

  friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

struct ChainRecord {
  SeedImage seed;
  Caption seed_caption;
  LabelSet seed_labels_a;
  LabelSet seed_labels_b;
  std::vector<ChainStep> steps;
  int chain_length = 0;
  Combo combo;
  Thresholds thresholds;
  std::uint64_t rng_seed = 0;
  bool complete = false;

  std::vector<BreakageFlags> flags() const;

  friend bool operator==(const ChainRecord&, const ChainRecord&) = default;
};

/// Chain-length histogram over bins 1..15.
struct LengthDistribution {
  Combo combo;
  std::array<std::int64_t, kMaxChainSteps> counts{};
  std::int64_t n = 0;

  std::int64_t count(int bin) const { return counts.at(static_cast<std::size_t>(bin - 1)); }
  double mean() const;

  friend bool operator==(const LengthDistribution&, const LengthDistribution&) = default;
};

struct FailedChain {
  std::string seed_id;
  int step = 0;
  std::string message;

  friend bool operator==(const FailedChain&, const FailedChain&) = default;
};

struct RunManifest {
  std::string run_id;
  Combo combo;
  std::string seed_set_id;
  Thresholds thresholds;
  std::set<std::string> completed_chain_ids;
  std::vector<FailedChain> failed_chains;
  std::uint64_t rng_seed = 0;
  std::vector<BackendDescriptor> backends;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks every ChainRecord invariant and lists each one that fails.
ValidationResult validate_chain_record(const ChainRecord& record);

}  // namespace fluidity
