#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "fluidity/keywords.hpp"

namespace fluidity {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '\''; }

// Splits text into candidate phrases (lists of lowercase words). Stopwords
// and any character other than a word character or whitespace end a phrase.
std::vector<std::vector<std::string>> candidate_phrases(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::vector<std::string>> phrases;
  std::vector<std::string> current;
  auto close = [&] {
    if (!current.empty()) phrases.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_word_char(c)) {
      std::string word;
      while (i < text.size() && is_word_char(text[i])) {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
        ++i;
      }
      while (!word.empty() && word.front() == '\'') word.erase(word.begin());
      while (!word.empty() && word.back() == '\'') word.pop_back();
      if (word.empty() || stopwords.contains(word)) {
        close();
      } else {
        current.push_back(std::move(word));
      }
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(c))) close();
    ++i;
  }
  close();
  return phrases;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

std::vector<ScoredKeyword> rake_keywords(std::string_view text, const StopwordSet& stopwords) {
  if (stopwords.empty()) throw std::invalid_argument("RAKE needs a non-empty stopword set");
  const auto phrases = candidate_phrases(text, stopwords);

  std::map<std::string, double> degree;
  std::map<std::string, double> frequency;
  for (const auto& phrase : phrases) {
    for (const auto& word : phrase) {
      degree[word] += static_cast<double>(phrase.size());
      frequency[word] += 1.0;
    }
  }

  std::vector<ScoredKeyword> out;
  for (const auto& phrase : phrases) {
    std::string key = join(phrase);
    if (std::any_of(out.begin(), out.end(), [&](const ScoredKeyword& k) { return k.phrase == key; })) continue;
    double score = 0.0;
    for (const auto& word : phrase) score += degree[word] / frequency[word];
    out.push_back({std::move(key), score});
  }
  std::stable_sort(out.begin(), out.end(), [](const ScoredKeyword& a, const ScoredKeyword& b) { return a.score > b.score; });
  return out;
}

}  // namespace fluidity
