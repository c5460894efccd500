#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "tweetlens/sentiment.hpp"

using namespace tweetlens;

TEST_CASE("empty text is neutral") {
  const auto s = score_sentiment("");
  CHECK(s.compound == 0.0);
  CHECK(s.neu == 1.0);
  CHECK(s.pos == 0.0);
  CHECK(s.neg == 0.0);
}

TEST_CASE("reference examples") {
  CHECK(score_sentiment("VADER is smart, handsome, and funny.").compound == doctest::Approx(0.8316).epsilon(1e-4));
  CHECK(score_sentiment("Shame on u.").compound < 0);
}

TEST_CASE("normalization") {
  CHECK(sentiment::normalize(0.0) == 0.0);
  CHECK(sentiment::normalize(1.0) == doctest::Approx(1.0 / 4.0));
  CHECK(sentiment::normalize(1e9) <= 1.0);
  CHECK(sentiment::normalize(-1e9) >= -1.0);
}

TEST_CASE("rule behaviors") {
  const double base = score_sentiment("The book was good.").compound;
  CHECK(score_sentiment("The book was very good.").compound > base);
  CHECK(score_sentiment("The book was not good.").compound < 0);
  CHECK(score_sentiment("The book was GOOD.").compound > base);  // caps emphasis in mixed-case text
  CHECK(score_sentiment("The book was good!").compound > base);
  CHECK(score_sentiment("The book was good!!!!").compound == score_sentiment("The book was good!!!!!!").compound);
  // contrastive conjunction: the clause after "but" dominates
  CHECK(score_sentiment("The food was good, but the shelter was terrible").compound < 0);
}

TEST_CASE("parity with frozen reference outputs") {
  const auto rows = testing::read_tsv(testing::data_path("sentiment_fixture.tsv"));
  REQUIRE(rows.size() == 100);
  int matched = 0;
  for (const auto& row : rows) {
    const auto s = score_sentiment(row[0]);
    const double expected = std::stod(row[1]);
    if (std::fabs(s.compound - expected) < 1e-4) {
      ++matched;
    } else {
      MESSAGE("mismatch: " << row[0] << " got " << s.compound << " want " << expected);
    }
    CHECK(s.pos + s.neu + s.neg == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.pos == doctest::Approx(std::stod(row[2])).epsilon(1e-6));
    CHECK(s.neg == doctest::Approx(std::stod(row[4])).epsilon(1e-6));
  }
  CHECK(matched >= 99);
}

TEST_CASE("property: '!' never flips a strictly positive compound") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> words = {"good", "bad",  "not", "very", "happy", "sad",   "but",  "the",
                                          "help", "love", "hate", "no",  "great", "awful", "cyclone", "kind", "of"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> len(1, 10);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (int i = len(rng); i > 0; --i) s += (s.empty() ? "" : " ") + words[pick(rng)];
    // A word of two letters or fewer keeps its trailing "!" as part of the token,
    // which changes the lexicon lookup rather than the emphasis.
    std::string last = words[pick(rng)];
    while (last.size() <= 2) last = words[pick(rng)];
    s += " " + last;
    const auto a = score_sentiment(s);
    const auto b = score_sentiment(s + "!");
    CAPTURE(s);
    if (a.compound > 0) CHECK(b.compound > 0);
    if (a.compound > 0) CHECK(b.compound >= a.compound);
    CHECK(a.compound >= -1.0);
    CHECK(a.compound <= 1.0);
    CHECK(a.pos + a.neu + a.neg == doctest::Approx(1.0).epsilon(1e-6));
  }
}
