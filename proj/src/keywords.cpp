#include <stdexcept>

#include "fluidity/keywords.hpp"
#include "fluidity/run_dir.hpp"

namespace fluidity {

namespace detail {
extern const std::string_view kStopwordsEn;
}

StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet set;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (!line.empty()) set.emplace(line);
    start = end + 1;
  }
  return set;
}

StopwordSet load_stopwords(const std::filesystem::path& path) { return parse_stopwords(read_file(path)); }

const StopwordSet& default_stopwords() {
  static const StopwordSet set = parse_stopwords(detail::kStopwordsEn);
  return set;
}

CaptionLabels extract_caption_labels(std::string_view caption_text) {
  CaptionLabels out;
  YakeParams params;
  params.top_k = kCaptionLabelCount;
  for (auto& k : yake_keywords(caption_text, params)) out.labels.push_back(std::move(k.phrase));
  if (!out.labels.empty()) {
    out.source = LabelSource::yake;
    return out;
  }
  auto rake = rake_keywords(caption_text, default_stopwords());
  if (rake.size() > kCaptionLabelCount) rake.resize(kCaptionLabelCount);
  for (auto& k : rake) out.labels.push_back(std::move(k.phrase));
  out.source = out.labels.empty() ? LabelSource::none : LabelSource::rake;
  return out;
}

}  // namespace fluidity
