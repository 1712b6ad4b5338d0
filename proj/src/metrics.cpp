#include "fluidity/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fluidity/keywords.hpp"

namespace fluidity {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("embedding dimensions differ: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double compat_score(const Embedding& image_embedding, const Embedding& caption_embedding) {
  return std::max(0.0, 100.0 * cosine_similarity(image_embedding, caption_embedding));
}

SimilarityContext::SimilarityContext(const BackendClient& client, BackendDescriptor embedder, Thresholds thresholds)
    : client_(client), descriptor_(std::move(embedder)), thresholds_(thresholds) {
  if (descriptor_.role != Role::embedder) throw std::invalid_argument("similarity context needs an embedder backend");
}

const Embedding& SimilarityContext::embed(const std::string& text) const {
  auto it = cache_.find(text);
  if (it == cache_.end()) it = cache_.emplace(text, client_.embed_text(text, descriptor_)).first;
  return it->second;
}

TextEmbedder SimilarityContext::embedder() const {
  return [this](const std::string& text) { return embed(text); };
}

double label_sim(const std::vector<std::string>& init_labels, const std::vector<std::string>& curr_labels,
                 const TextEmbedder& embed) {
  if (init_labels.empty()) return 0.0;
  double similarity = 0.0;
  for (const auto& label : init_labels) {
    if (std::find(curr_labels.begin(), curr_labels.end(), label) != curr_labels.end()) {
      similarity += 1.0;
      continue;
    }
    double best = 0.0;
    if (!curr_labels.empty()) {
      const Embedding a = embed(label);
      for (const auto& other : curr_labels) best = std::max(best, cosine_similarity(a, embed(other)));
    }
    similarity += best;
  }
  return std::clamp(similarity / static_cast<double>(init_labels.size()), 0.0, 1.0);
}

namespace {

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += kLabelJoiner;
    out += l;
  }
  return out;
}

}  // namespace

CaptionPairScores caption_pair_scores(const Caption& init_caption, const Caption& curr_caption,
                                      const SimilarityContext& ctx) {
  CaptionPairScores scores;
  scores.caption_semantic = cosine_similarity(ctx.embed(init_caption.text), ctx.embed(curr_caption.text));
  const CaptionLabels init_labels = extract_caption_labels(init_caption);
  const CaptionLabels curr_labels = extract_caption_labels(curr_caption);
  if (init_labels.missing() || curr_labels.missing()) {
    scores.labels_missing = true;
    scores.label_semantic = 0.0;
  } else {
    scores.label_semantic =
        cosine_similarity(ctx.embed(join_labels(init_labels.labels)), ctx.embed(join_labels(curr_labels.labels)));
  }
  return scores;
}

BreakageFlags evaluate_step(const StepMetrics& m, const Thresholds& t) {
  BreakageFlags f;
  f.by_compat = m.compat_score < t.compat_min;
  f.by_semantics = m.label_semantic_score < t.semantic_min && m.caption_semantic_score < t.semantic_min;
  f.by_labels = m.detector_a_sim < t.label_min && m.detector_b_sim < t.label_min;
  f.broken = f.by_compat || f.by_semantics || f.by_labels;
  return f;
}

int chain_length(std::span<const BreakageFlags> flags, int max_len) {
  if (flags.empty()) throw std::invalid_argument("chain_length of an empty flag list");
  if (flags.size() > static_cast<std::size_t>(max_len)) {
    throw std::invalid_argument("flag list longer than " + std::to_string(max_len));
  }
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i].broken) return static_cast<int>(i) + 1;
  }
  return max_len;
}

}  // namespace fluidity
