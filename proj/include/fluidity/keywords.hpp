#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fluidity/domain.hpp"

namespace fluidity {

using StopwordSet = std::unordered_set<std::string>;

/// The frozen English list shipped as data/stopwords_en.txt.
const StopwordSet& default_stopwords();
/// One lowercase token per line; blank lines are ignored.
StopwordSet parse_stopwords(std::string_view text);
StopwordSet load_stopwords(const std::filesystem::path& path);

struct ScoredKeyword {
  std::string phrase;  // lowercase
  double score = 0.0;

  friend bool operator==(const ScoredKeyword&, const ScoredKeyword&) = default;
};

/// RAKE. Candidates are maximal runs of words between stopwords and
/// punctuation. A word scores degree/frequency, where degree sums the lengths
/// of the candidate occurrences containing it; a phrase scores the sum of its
/// words. Sorted by descending score, ties by first occurrence. Higher is
/// better. Throws std::invalid_argument for an empty stopword set.
std::vector<ScoredKeyword> rake_keywords(std::string_view text, const StopwordSet& stopwords);

struct YakeParams {
  int ngram_max = 3;
  int window = 1;
  std::size_t top_k = 5;
  double dedup_threshold = 0.9;
};

/// YAKE single-document extractor. Lower scores are better. Throws
/// std::invalid_argument when ngram_max < 1.
std::vector<ScoredKeyword> yake_keywords(std::string_view text, const YakeParams& params = {},
                                         const StopwordSet& stopwords = default_stopwords());

enum class LabelSource { yake, rake, none };

struct CaptionLabels {
  std::vector<std::string> labels;
  LabelSource source = LabelSource::none;

  /// True when neither extractor produced anything.
  bool missing() const { return source == LabelSource::none; }
};

inline constexpr std::size_t kCaptionLabelCount = 5;

/// YAKE first; RAKE when YAKE finds nothing; otherwise empty with source none.
CaptionLabels extract_caption_labels(std::string_view caption_text);
inline CaptionLabels extract_caption_labels(const Caption& caption) { return extract_caption_labels(caption.text); }

}  // namespace fluidity
