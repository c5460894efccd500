#include <doctest.h>

#include <cctype>
#include <random>

#include "test_support.hpp"
#include "tweetlens/text.hpp"

using namespace tweetlens;

TEST_CASE("clean_text FULL strips reserved tokens, folds and lemmatizes") {
  CHECK(clean_text("RT @user Amphan destroyed homes! https://t.co/x #amphan", CleanProfile::Full) ==
        "amphan destroyed home");
}

TEST_CASE("clean_text LIGHT keeps punctuation and case") {
  CHECK(clean_text("Lifts are not working since Amphan cyclone.", CleanProfile::Light) ==
        "Lifts are not working since Amphan cyclone.");
  CHECK(clean_text("RT @user: Roof gone \xF0\x9F\x98\xAD #Amphan http://x.co/1", CleanProfile::Light) == "Roof gone");
  CHECK(clean_text("home\xF0\x9F\x98\xAD" "flooded", CleanProfile::Light) == "home flooded");
}

TEST_CASE("clean_text on empty and degenerate input") {
  for (auto profile : {CleanProfile::Full, CleanProfile::Light}) {
    CHECK(clean_text("", profile).empty());
    CHECK(clean_text("   \t\n ", profile).empty());
    CHECK(clean_text("RT FAV #a @b https://t.co/z", profile).empty());
  }
  CHECK(clean_text("the and of to", CleanProfile::Full).empty());
}

TEST_CASE("URL forms") {
  CHECK(clean_text("see https://example.com/a?b=c now", CleanProfile::Light) == "see now");
  CHECK(clean_text("see www.example.com now", CleanProfile::Light) == "see now");
  CHECK(clean_text("link:https://t.co/abc", CleanProfile::Light) == "link:");
  CHECK(clean_text("t.co/abc gone", CleanProfile::Light) == "gone");
}

TEST_CASE("stopword list is the bundled 179-entry list") {
  CHECK(stopword_list().size() == 179);
  CHECK(is_stopword("the"));
  CHECK(is_stopword("don't"));
  CHECK(is_stopword("dont"));
  CHECK_FALSE(is_stopword("cyclone"));
}

TEST_CASE("lemmatizer") {
  const auto& lem = Lemmatizer::builtin();
  CHECK(lem.lemmatize("homes") == "home");
  CHECK(lem.lemmatize("houses") == "house");
  CHECK(lem.lemmatize("supplies") == "supply");
  CHECK(lem.lemmatize("churches") == "church");
  CHECK(lem.lemmatize("children") == "child");
  CHECK(lem.lemmatize("news") == "news");
  CHECK(lem.lemmatize("crisis") == "crisis");
  CHECK(lem.lemmatize("glass") == "glass");
  CHECK(lem.lemmatize("destroyed") == "destroyed");
  CHECK(lem.lemmatize("destroyed", PartOfSpeech::Verb) == "destroy");
  CHECK(lem.lemmatize("was", PartOfSpeech::Verb) == "be");
  CHECK(lem.lemmatize("firemen") == "fireman");
}

TEST_CASE("lemmatizer exception table entries are fixed points") {
  const auto table = testing::read_tsv(testing::data_path("../../data/lemma_exceptions.tsv"));
  const auto& lem = Lemmatizer::builtin();
  REQUIRE(table.size() > 100);
  for (const auto& row : table) {
    REQUIRE(row.size() == 3);
    const auto pos = row[2] == "v" ? PartOfSpeech::Verb : PartOfSpeech::Noun;
    CAPTURE(row[0]);
    CHECK(lem.lemmatize(row[0], pos) == lem.lemmatize(lem.lemmatize(row[0], pos), pos));
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("amphan destroyed home") == std::vector<std::string>{"amphan", "destroyed", "home"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("wait ... what ?! ok") == std::vector<std::string>{"wait", "what", "ok"});
}

TEST_CASE("tokenize count matches an independent whitespace split") {
  const std::string tweet =
      "@siddhagroup Plz don't fool people. We r residents of Siddha Galaxia Oceania block. We r suffering from "
      "poor quality windows, bedrooms of residents flooded during Amphan cyclone. Lifts are not working since "
      "Amphan cyclone. No update from Siddha when the lifts will be repaired. Shame on u.";
  const std::string light = clean_text(tweet, CleanProfile::Light);
  std::istringstream ss(light);
  std::size_t oracle = 0;
  for (std::string w; ss >> w;) ++oracle;
  const auto tokens = tokenize(light);
  CHECK(tokens.size() > 0);
  CHECK(tokens.size() == oracle);
}

namespace {

std::string random_tweet(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "RT", "FAV", "rt", "@user", "@PMOIndia:", "#Amphan", "#relief", "https://t.co/xyz", "http://a.b/c",
      "www.site.org", "HOMES", "homes", "Houses!", "the", "and", "don't", "I", "We", "cyclone,", "...", "?!",
      "\xF0\x9F\x98\xAD", "\xE2\x9D\xA4\xEF\xB8\x8F", "Kolkata.", "(flooded)", "r.t", "f-a-v", "supplies",
      "children", "glasses", "a#b", "x@y", "crises", "ares", "mens", "it's", "\xE2\x80\x9Cquoted\xE2\x80\x9D"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 14);
  std::uniform_int_distribution<int> coin(0, 3);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += coin(rng) == 0 ? "  " : " ";
    out += coin(rng) == 0 ? testing::random_word(rng) : pieces[pick(rng)];
  }
  return out;
}

}  // namespace

TEST_CASE("property: clean_text is idempotent per profile") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string raw = random_tweet(rng);
    CAPTURE(raw);
    for (auto profile : {CleanProfile::Full, CleanProfile::Light}) {
      const std::string once = clean_text(raw, profile);
      CHECK(clean_text(once, profile) == once);
    }
  }
}

TEST_CASE("property: FULL output has no uppercase, stopwords, reserved markers or URLs") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string raw = random_tweet(rng);
    const std::string full = clean_text(raw, CleanProfile::Full);
    CAPTURE(raw);
    for (char c : full) CHECK_FALSE(std::isupper(static_cast<unsigned char>(c)));
    CHECK(full.find('#') == std::string::npos);
    CHECK(full.find('@') == std::string::npos);
    CHECK(full.find("http") == std::string::npos);
    CHECK(full.find("  ") == std::string::npos);
    for (const auto& token : tokenize(full)) {
      CHECK_FALSE(token.empty());
      CHECK_FALSE(is_stopword(token));
    }
  }
}
