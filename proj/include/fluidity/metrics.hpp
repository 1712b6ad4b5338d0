#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fluidity/backend.hpp"
#include "fluidity/domain.hpp"

namespace fluidity {

/// Throws std::invalid_argument on a dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
inline double cosine_similarity(const Embedding& a, const Embedding& b) { return cosine_similarity(a.vector, b.vector); }

/// Image/caption compatibility on a 0..100 scale: max(0, 100 * cosine).
double compat_score(const Embedding& image_embedding, const Embedding& caption_embedding);

using TextEmbedder = std::function<Embedding(const std::string&)>;

/// Embedding access for one chain. Memoizes text embeddings, so a context
/// must not be shared between threads.
class SimilarityContext {
 public:
  SimilarityContext(const BackendClient& client, BackendDescriptor embedder, Thresholds thresholds = {});

  const Embedding& embed(const std::string& text) const;
  TextEmbedder embedder() const;
  const Thresholds& thresholds() const { return thresholds_; }

 private:
  const BackendClient& client_;
  BackendDescriptor descriptor_;
  Thresholds thresholds_;
  mutable std::unordered_map<std::string, Embedding> cache_;
};

/// Label-set similarity: each initial label scores 1 when present verbatim
/// in the current set, else its best (non-negative) cosine against the
/// current labels; the sum is divided by the number of initial labels.
/// Empty initial set gives 0.
double label_sim(const std::vector<std::string>& init_labels, const std::vector<std::string>& curr_labels,
                 const TextEmbedder& embed);
inline double label_sim(const LabelSet& init, const LabelSet& curr, const SimilarityContext& ctx) {
  return label_sim(init.labels, curr.labels, ctx.embedder());
}

/// Labels are joined with this before embedding for the label-level score.
inline constexpr std::string_view kLabelJoiner = ", ";

struct CaptionPairScores {
  double label_semantic = 0.0;    // cosine between the joined keyword labels
  double caption_semantic = 0.0;  // cosine between the whole captions
  bool labels_missing = false;    // a caption yielded no keywords; label_semantic forced to 0
};

CaptionPairScores caption_pair_scores(const Caption& init_caption, const Caption& curr_caption,
                                      const SimilarityContext& ctx);

/// Compat breaks when below its cut-off; semantics breaks when both scores
/// are below theirs; labels break when both detectors are below theirs.
BreakageFlags evaluate_step(const StepMetrics& metrics, const Thresholds& thresholds);

/// 1-based index of the first broken step, or max_len when none broke.
/// Throws std::invalid_argument for an empty list or one longer than max_len.
int chain_length(std::span<const BreakageFlags> flags, int max_len = kMaxChainSteps);

}  // namespace fluidity
