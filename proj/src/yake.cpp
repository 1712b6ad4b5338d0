#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "fluidity/keywords.hpp"

namespace fluidity {

namespace {

constexpr std::string_view kPunctuation = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

bool is_punct(char c) { return kPunctuation.find(c) != std::string_view::npos; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Paragraph breaks are inserted before lines that start with a capital.
std::string pre_filter(std::string_view text) {
  std::string buffer;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find('\n', start);
    std::string part(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    std::size_t k = 0;
    while (k < part.size() && is_space(part[k])) ++k;
    buffer += (k < part.size() && is_upper(part[k])) ? "\n\n" : " ";
    std::replace(part.begin(), part.end(), '\t', ' ');
    buffer += part;
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return buffer;
}

// Sentence splitting: after ! or ? followed by whitespace, after . followed by
// whitespace and an uppercase letter or digit, and at blank lines.
std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n' && i + 1 < text.size() && text[i + 1] == '\n') {
      sentences.push_back(current);
      current.clear();
      ++i;
      continue;
    }
    current += c;
    if ((c == '!' || c == '?' || c == '.') && i + 1 < text.size() && is_space(text[i + 1])) {
      bool split = c != '.';
      if (!split) {
        std::size_t j = i + 1;
        while (j < text.size() && is_space(text[j])) ++j;
        split = j < text.size() && (is_upper(text[j]) || std::isdigit(static_cast<unsigned char>(text[j])));
      }
      if (split) {
        sentences.push_back(current);
        current.clear();
      }
    }
  }
  sentences.push_back(current);
  std::vector<std::string> out;
  for (auto& s : sentences) {
    if (s.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(std::move(s));
  }
  return out;
}

// Word tokens keep internal . , - between alphanumerics ("3.5", "1,000",
// "e-mail"). Contractions split off and the apostrophe part is dropped, as is
// "'s". Punctuation runs become their own tokens.
std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
      continue;
    }
    if (is_alnum(s[i])) {
      std::string word;
      while (i < s.size()) {
        const char c = s[i];
        if (is_alnum(c)) {
          word += c;
          ++i;
        } else if ((c == '.' || c == ',' || c == '-') && i + 1 < s.size() && is_alnum(s[i + 1])) {
          word += c;
          ++i;
        } else {
          break;
        }
      }
      if (i + 1 < s.size() && s[i] == '\'' && is_alnum(s[i + 1])) {
        // "don't" -> "do" + "n't"; "person's" -> "person" + "'s" (dropped)
        std::size_t j = i + 1;
        while (j < s.size() && is_alnum(s[j])) ++j;
        std::string suffix(s.substr(i + 1, j - i - 1));
        if (lower(suffix) == "t" && word.size() > 1 && std::tolower(static_cast<unsigned char>(word.back())) == 'n') {
          word.pop_back();
          tokens.push_back(word);
          tokens.push_back("n't");
        } else {
          tokens.push_back(word);
        }
        i = j;
        continue;
      }
      tokens.push_back(std::move(word));
      continue;
    }
    std::string punct;
    while (i < s.size() && !is_space(s[i]) && !is_alnum(s[i])) punct += s[i++];
    tokens.push_back(std::move(punct));
  }
  return tokens;
}

bool parses_as_float(const std::string& word) {
  std::string w;
  for (char c : word) {
    if (c != ',') w += c;
  }
  if (w.empty()) return false;
  for (char c : w) {
    if (c == 'x' || c == 'X' || c == 'p' || c == 'P') return false;
  }
  char* end = nullptr;
  std::strtod(w.c_str(), &end);
  return end == w.c_str() + w.size();
}

char tag_of(const std::string& word, std::size_t position) {
  if (parses_as_float(word)) return 'd';
  std::size_t digits = 0, alphas = 0, puncts = 0, uppers = 0;
  for (char c : word) {
    if (std::isdigit(static_cast<unsigned char>(c))) ++digits;
    if (std::isalpha(static_cast<unsigned char>(c))) ++alphas;
    if (is_punct(c)) ++puncts;
    if (is_upper(c)) ++uppers;
  }
  if ((digits > 0 && alphas > 0) || (digits == 0 && alphas == 0) || puncts > 1) return 'u';
  if (word.size() == uppers) return 'a';
  if (uppers == 1 && word.size() > 1 && is_upper(word[0]) && position > 0) return 'n';
  return 'p';
}

struct Term {
  std::string unique;
  double tf = 0.0;
  double tf_a = 0.0;
  double tf_n = 0.0;
  std::vector<int> sentences;  // distinct sentence ids, ascending
  bool stopword = false;
  double h = 0.0;
};

struct Token {
  char tag;
  std::string word;
  std::size_t term;
};

struct Candidate {
  std::vector<std::string> tags;
  std::string kw;
  std::string unique_kw;
  std::vector<std::size_t> terms;
  double tf = 0.0;
  double h = 1.0;
  bool edge_stopword = false;

  bool valid() const {
    const bool clean_tag = std::any_of(tags.begin(), tags.end(), [](const std::string& t) {
      return t.find('u') == std::string::npos && t.find('d') == std::string::npos;
    });
    return clean_tag && !edge_stopword;
  }
};

class Document {
 public:
  Document(std::string_view text, const StopwordSet& stopwords, int window, int ngram_max) : stopwords_(stopwords) {
    build(text, window, ngram_max);
  }

  std::vector<ScoredKeyword> extract(const YakeParams& params) {
    score_terms();
    std::vector<Candidate*> ranked;
    for (auto& c : candidates_) {
      if (c.valid()) {
        score_candidate(c);
        ranked.push_back(&c);
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate* a, const Candidate* b) { return a->h < b->h; });

    std::vector<ScoredKeyword> out;
    if (params.dedup_threshold >= 1.0) {
      for (const auto* c : ranked) {
        if (out.size() == params.top_k) break;
        out.push_back({c->unique_kw, c->h});
      }
      return out;
    }
    for (const auto* c : ranked) {
      if (out.size() == params.top_k) break;
      const bool duplicate = std::any_of(out.begin(), out.end(), [&](const ScoredKeyword& k) {
        return similarity(c->unique_kw, k.phrase) > params.dedup_threshold;
      });
      if (!duplicate) out.push_back({c->unique_kw, c->h});
    }
    return out;
  }

 private:
  static double similarity(const std::string& a, const std::string& b) {
    // 1 - levenshtein(a, b) / max(|a|, |b|)
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= b.size(); ++j) {
        const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
      }
      std::swap(prev, cur);
    }
    const double longest = static_cast<double>(std::max(a.size(), b.size()));
    return longest == 0.0 ? 1.0 : 1.0 - static_cast<double>(prev[b.size()]) / longest;
  }

  std::size_t term_for(const std::string& word) {
    std::string unique = lower(word);
    const bool plain_stopword = stopwords_.contains(unique);
    if (unique.size() > 3 && unique.back() == 's') unique.pop_back();
    if (auto it = index_.find(unique); it != index_.end()) return it->second;
    std::string bare;
    for (char c : unique) {
      if (!is_punct(c)) bare += c;
    }
    Term term;
    term.unique = unique;
    term.stopword = plain_stopword || stopwords_.contains(unique) || bare.size() < 3;
    terms_.push_back(std::move(term));
    index_.emplace(unique, terms_.size() - 1);
    return terms_.size() - 1;
  }

  void add_candidate(const std::vector<Token>& tokens) {
    Candidate c;
    std::string tag;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      tag += tokens[k].tag;
      if (k > 0) c.kw += ' ';
      c.kw += tokens[k].word;
      c.terms.push_back(tokens[k].term);
    }
    c.unique_kw = lower(c.kw);
    c.tags.push_back(tag);
    c.edge_stopword = terms_[c.terms.front()].stopword || terms_[c.terms.back()].stopword;
    auto it = candidate_index_.find(c.unique_kw);
    if (it == candidate_index_.end()) {
      c.tf = 1.0;
      candidate_index_.emplace(c.unique_kw, candidates_.size());
      candidates_.push_back(std::move(c));
    } else {
      Candidate& existing = candidates_[it->second];
      if (std::find(existing.tags.begin(), existing.tags.end(), tag) == existing.tags.end()) existing.tags.push_back(tag);
      existing.tf += 1.0;
    }
  }

  void build(std::string_view text, int window, int ngram_max) {
    const auto sentences = split_sentences(pre_filter(text));
    sentence_count_ = 0;
    for (const auto& sentence : sentences) {
      const auto words = tokenize(sentence);
      if (words.empty()) continue;
      const int sentence_id = sentence_count_++;
      std::vector<Token> block;
      for (std::size_t pos = 0; pos < words.size(); ++pos) {
        const std::string& word = words[pos];
        if (std::all_of(word.begin(), word.end(), is_punct)) {
          block.clear();
          continue;
        }
        const char tag = tag_of(word, pos);
        const std::size_t term_id = term_for(word);
        Term& term = terms_[term_id];
        term.tf += 1.0;
        if (tag == 'a') term.tf_a += 1.0;
        if (tag == 'n') term.tf_n += 1.0;
        if (term.sentences.empty() || term.sentences.back() != sentence_id) term.sentences.push_back(sentence_id);

        const bool discard = tag == 'u' || tag == 'd';
        if (!discard) {
          const std::size_t from = block.size() > static_cast<std::size_t>(window) ? block.size() - window : 0;
          for (std::size_t w = from; w < block.size(); ++w) {
            if (block[w].tag != 'u' && block[w].tag != 'd') edges_[{block[w].term, term_id}] += 1.0;
          }
        }

        std::vector<Token> candidate{{tag, word, term_id}};
        add_candidate(candidate);
        const std::size_t reach = static_cast<std::size_t>(ngram_max - 1);
        const std::size_t from = block.size() > reach ? block.size() - reach : 0;
        for (std::size_t w = block.size(); w-- > from;) {
          candidate.insert(candidate.begin(), block[w]);
          add_candidate(candidate);
        }
        block.push_back({tag, word, term_id});
      }
    }
  }

  void score_terms() {
    std::vector<double> valid_tfs;
    double max_tf = 0.0;
    for (const auto& t : terms_) {
      max_tf = std::max(max_tf, t.tf);
      if (!t.stopword) valid_tfs.push_back(t.tf);
    }
    if (valid_tfs.empty()) return;
    double mean = 0.0;
    for (double v : valid_tfs) mean += v;
    mean /= static_cast<double>(valid_tfs.size());
    double var = 0.0;
    for (double v : valid_tfs) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(valid_tfs.size()));

    std::vector<double> in_distinct(terms_.size()), in_weight(terms_.size());
    std::vector<double> out_distinct(terms_.size()), out_weight(terms_.size());
    for (const auto& [edge, weight] : edges_) {
      out_distinct[edge.first] += 1.0;
      out_weight[edge.first] += weight;
      in_distinct[edge.second] += 1.0;
      in_weight[edge.second] += weight;
    }

    for (std::size_t i = 0; i < terms_.size(); ++i) {
      Term& t = terms_[i];
      const double pwl = in_weight[i] == 0.0 ? 0.0 : in_distinct[i] / in_weight[i];
      const double pwr = out_weight[i] == 0.0 ? 0.0 : out_distinct[i] / out_weight[i];
      const double relatedness = (0.5 + pwl * (t.tf / max_tf)) + (0.5 + pwr * (t.tf / max_tf));
      const double frequency = t.tf / (mean + sd);
      const double spread = static_cast<double>(t.sentences.size()) / sentence_count_;
      const double casing = std::max(t.tf_a, t.tf_n) / (1.0 + std::log(t.tf));
      const auto& s = t.sentences;
      const double median = s.size() % 2 == 1 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
      const double position = std::log(std::log(3.0 + median));
      t.h = (position * relatedness) / (casing + frequency / relatedness + spread / relatedness);
    }
  }

  double edge_weight(std::size_t from, std::size_t to) const {
    auto it = edges_.find({from, to});
    return it == edges_.end() ? 0.0 : it->second;
  }

  void score_candidate(Candidate& c) const {
    double sum_h = 0.0;
    double prod_h = 1.0;
    for (std::size_t k = 0; k < c.terms.size(); ++k) {
      const Term& term = terms_[c.terms[k]];
      if (!term.stopword) {
        sum_h += term.h;
        prod_h *= term.h;
        continue;
      }
      // Interior stopword: weighted by how strongly it binds its neighbours.
      const std::size_t left = c.terms[(k + c.terms.size() - 1) % c.terms.size()];
      const std::size_t right = c.terms[(k + 1) % c.terms.size()];
      const double p_left = edge_weight(left, c.terms[k]) / terms_[left].tf;
      const double p_right = edge_weight(c.terms[k], right) / terms_[right].tf;
      const double p = p_left * p_right;
      prod_h *= 1.0 + (1.0 - p);
      sum_h -= 1.0 - p;
    }
    c.h = prod_h / ((sum_h + 1.0) * c.tf);
  }

  const StopwordSet& stopwords_;
  std::vector<Term> terms_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::pair<std::size_t, std::size_t>, double> edges_;
  std::vector<Candidate> candidates_;
  std::unordered_map<std::string, std::size_t> candidate_index_;
  int sentence_count_ = 0;
};

}  // namespace

std::vector<ScoredKeyword> yake_keywords(std::string_view text, const YakeParams& params, const StopwordSet& stopwords) {
  if (params.ngram_max < 1) throw std::invalid_argument("ngram_max must be at least 1");
  if (text.empty() || params.top_k == 0) return {};
  std::string cleaned(text);
  for (std::size_t pos; (pos = cleaned.find("\n\t")) != std::string::npos;) cleaned.replace(pos, 2, " ");
  Document doc(cleaned, stopwords, params.window, params.ngram_max);
  return doc.extract(params);
}

}  // namespace fluidity
