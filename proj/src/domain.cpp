#include "fluidity/domain.hpp"

#include <cmath>
#include <stdexcept>

#include "fluidity/metrics.hpp"

namespace fluidity {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::captioner: return "captioner";
    case Role::image_generator: return "image_generator";
    case Role::labeler: return "labeler";
    case Role::embedder: return "embedder";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "captioner") return Role::captioner;
  if (text == "image_generator") return Role::image_generator;
  if (text == "labeler") return Role::labeler;
  if (text == "embedder") return Role::embedder;
  return std::nullopt;
}

std::string BackendDescriptor::param_or(const std::string& key, std::string fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void Thresholds::validate() const {
  if (!(compat_min > 0.0) || !std::isfinite(compat_min)) {
    throw std::invalid_argument("compat_min must be positive");
  }
  if (!(semantic_min > 0.0 && semantic_min < 1.0)) {
    throw std::invalid_argument("semantic_min must lie in (0,1)");
  }
  if (!(label_min > 0.0 && label_min < 1.0)) {
    throw std::invalid_argument("label_min must lie in (0,1)");
  }
}

std::vector<BreakageFlags> ChainRecord::flags() const {
  std::vector<BreakageFlags> out;
  out.reserve(steps.size());
  for (const auto& step : steps) out.push_back(step.flags);
  return out;
}

double LengthDistribution::mean() const {
  if (n == 0) return 0.0;
  double total = 0.0;
  for (int bin = 1; bin <= kMaxChainSteps; ++bin) total += static_cast<double>(bin) * count(bin);
  return total / static_cast<double>(n);
}

namespace {

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

bool has_duplicates(const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i] == labels[j]) return true;
    }
  }
  return false;
}

}  // namespace

ValidationResult validate_chain_record(const ChainRecord& record) {
  ValidationResult result;
  auto fail = [&](std::string message) { result.violations.push_back(std::move(message)); };

  if (record.seed.id.empty()) fail("seed id is empty");
  if (record.seed_caption.step_index != 0) fail("seed caption step_index must be 0");
  if (record.complete && record.seed_caption.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    fail("seed caption is empty");
  }
  if (record.steps.size() > static_cast<std::size_t>(kMaxChainSteps)) {
    fail("step count exceeds 15");
  }
  try {
    record.thresholds.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("thresholds: ") + e.what());
  }
  if (has_duplicates(record.seed_labels_a.labels) || has_duplicates(record.seed_labels_b.labels)) {
    fail("seed label set contains duplicates");
  }

  int first_broken = 0;
  for (std::size_t i = 0; i < record.steps.size(); ++i) {
    const auto& step = record.steps[i];
    const int expected_index = static_cast<int>(i) + 1;
    const std::string where = "step " + std::to_string(expected_index) + ": ";
    if (step.index != expected_index) fail(where + "index out of sequence");
    if (step.caption.step_index != expected_index) fail(where + "caption step_index mismatch");
    if (step.caption.text.find_first_not_of(" \t\r\n") == std::string::npos) fail(where + "caption is empty");
    if (has_duplicates(step.labels_a.labels) || has_duplicates(step.labels_b.labels)) {
      fail(where + "label set contains duplicates");
    }

    const auto& m = step.metrics;
    if (!(std::isfinite(m.compat_score) && m.compat_score >= 0.0)) fail(where + "compat_score out of range");
    if (!in_range(m.detector_a_sim, 0.0, 1.0)) fail(where + "detector_a_sim out of range");
    if (!in_range(m.detector_b_sim, 0.0, 1.0)) fail(where + "detector_b_sim out of range");
    if (!in_range(m.label_semantic_score, -1.0, 1.0)) fail(where + "label_semantic_score out of range");
    if (!in_range(m.caption_semantic_score, -1.0, 1.0)) fail(where + "caption_semantic_score out of range");

    const auto& f = step.flags;
    if (f.broken != (f.by_compat || f.by_semantics || f.by_labels)) fail(where + "broken flag inconsistent");
    if (evaluate_step(m, record.thresholds) != f) fail(where + "flags do not match stored metrics");
    if (f.broken && first_broken == 0) first_broken = expected_index;
  }

  if (record.complete) {
    if (record.steps.empty()) {
      fail("complete chain has no steps");
    } else {
      const int expected = first_broken != 0 ? first_broken : static_cast<int>(record.steps.size());
      if (record.chain_length != expected) fail("chain_length mismatch");
    }
  } else if (record.chain_length != 0) {
    fail("incomplete chain must not carry a chain_length");
  }
  return result;
}

}  // namespace fluidity
