#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fluidity/keywords.hpp"
#include "support.hpp"

using namespace fluidity;

namespace {

std::vector<std::string> words_of(const std::string& phrase) {
  std::vector<std::string> out;
  std::istringstream in(phrase);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

TEST_CASE("RAKE hand case: both phrases score 4") {
  const auto kw = rake_keywords("red cars and red trucks", StopwordSet{"and"});
  REQUIRE(kw.size() == 2);
  CHECK(kw[0].phrase == "red cars");
  CHECK(kw[1].phrase == "red trucks");
  CHECK(kw[0].score == 4.0);
  CHECK(kw[1].score == 4.0);
}

TEST_CASE("RAKE phrase score is the sum of its word scores") {
  const std::vector<std::string> texts = {
      "two large trucks parked next to each other on a road",
      "a view of a road with trees lining both sides of it",
      "Compatibility of systems of linear constraints over the set of natural numbers. Criteria of compatibility "
      "of a system of linear Diophantine equations, strict inequations, and nonstrict inequations are considered.",
      "red truck red truck red road, old truck"};
  for (const auto& text : texts) {
    const auto kw = rake_keywords(text, default_stopwords());
    REQUIRE_FALSE(kw.empty());
    // Single-word candidates expose word scores; every longer phrase must be their sum.
    std::map<std::string, double> word_score;
    for (const auto& k : kw) {
      const auto w = words_of(k.phrase);
      if (w.size() == 1) word_score[w[0]] = k.score;
    }
    for (const auto& k : kw) {
      const auto w = words_of(k.phrase);
      bool all_known = true;
      double sum = 0.0;
      for (const auto& x : w) {
        all_known = all_known && word_score.contains(x);
        if (all_known) sum += word_score[x];
      }
      if (all_known) CHECK(k.score == doctest::Approx(sum).epsilon(1e-12));
    }
    for (std::size_t i = 1; i < kw.size(); ++i) CHECK(kw[i - 1].score >= kw[i].score);
  }
}

TEST_CASE("RAKE on the classic abstract") {
  // By hand: linear deg 5 / freq 2 = 2.5, diophantine 3, equations 3, constraints 2.
  const StopwordSet stop = {"of", "over", "the", "a", "and", "are", "set", "considered"};
  const auto kw = rake_keywords(
      "Compatibility of systems of linear constraints over the set of natural numbers. Criteria of compatibility "
      "of a system of linear Diophantine equations, strict inequations, and nonstrict inequations are considered.",
      stop);
  REQUIRE(kw.size() >= 3);
  CHECK(kw[0].phrase == "linear diophantine equations");
  CHECK(kw[0].score == doctest::Approx(8.5));
  CHECK(kw[1].phrase == "linear constraints");
  CHECK(kw[1].score == doctest::Approx(4.5));
}

TEST_CASE("RAKE rejects an empty stopword set") {
  CHECK_THROWS_AS(rake_keywords("red truck", StopwordSet{}), std::invalid_argument);
}

TEST_CASE("YAKE matches the reference package on every stored text") {
  const auto j = nlohmann::json::parse(read_file(test::fixture("yake_reference.json")));
  for (const auto& c : j["cases"]) {
    const std::string text = c["text"];
    const auto got = yake_keywords(text);
    const auto& want = c["keywords"];
    REQUIRE_MESSAGE(got.size() == want.size(), text);
    for (std::size_t i = 0; i < got.size(); ++i) {
      std::string phrase = want[i][0];
      for (auto& ch : phrase) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      CHECK_MESSAGE(got[i].phrase == phrase, text);
      CHECK_MESSAGE(got[i].score == doctest::Approx(want[i][1].get<double>()).epsilon(1e-9), text);
    }
  }
}

TEST_CASE("caption labels: YAKE first, RAKE fallback, none for empties") {
  const auto normal = extract_caption_labels("two large trucks parked next to each other on a road");
  CHECK(normal.source == LabelSource::yake);
  CHECK_FALSE(normal.labels.empty());
  CHECK(normal.labels.size() <= kCaptionLabelCount);
  std::vector<std::string> from_yake;
  for (const auto& k : yake_keywords("two large trucks parked next to each other on a road")) {
    from_yake.push_back(k.phrase);
  }
  CHECK(normal.labels == from_yake);

  // Digits and symbol-bound tokens are not YAKE candidates but RAKE keeps them.
  CHECK(yake_keywords("the 2024 of").empty());
  const auto fallback = extract_caption_labels("the 2024 of");
  CHECK(fallback.source == LabelSource::rake);
  CHECK(fallback.labels == std::vector<std::string>{"2024"});

  const auto none = extract_caption_labels("");
  CHECK(none.missing());
  CHECK(none.labels.empty());
  CHECK(extract_caption_labels("of the and").missing());
}

TEST_CASE("keyword ranking ignores whitespace layout") {
  const std::string base = "a large red truck parked on a busy road near a tree";
  std::string spaced;
  std::mt19937_64 rng(21);
  for (char c : base) {
    if (c == ' ') {
      spaced += std::string(1 + rng() % 3, rng() % 2 ? ' ' : '\t');
      if (rng() % 5 == 0) spaced += "\n";
    } else {
      spaced += c;
    }
  }
  CHECK(yake_keywords(spaced) == yake_keywords(base));
  CHECK(rake_keywords(spaced, default_stopwords()) == rake_keywords(base, default_stopwords()));
  CHECK(extract_caption_labels(spaced).labels == extract_caption_labels(base).labels);
}

TEST_CASE("extractors are pure") {
  const std::string t = "A woman with red nails and a yellow shirt.";
  CHECK(yake_keywords(t) == yake_keywords(t));
  CHECK(rake_keywords(t, default_stopwords()) == rake_keywords(t, default_stopwords()));
}

TEST_CASE("stopword file parsing") {
  const auto s = parse_stopwords("the\n\nand\r\nOf\n");
  CHECK(s.contains("the"));
  CHECK(s.contains("and"));
  CHECK(s.size() == 3);
  CHECK(default_stopwords().contains("the"));
  CHECK(load_stopwords(std::filesystem::path(FLUIDITY_SOURCE_DIR) / "data" / "stopwords_en.txt") ==
        default_stopwords());
  CHECK_THROWS_AS(yake_keywords("x", YakeParams{0, 1, 5, 0.9}), std::invalid_argument);
}
