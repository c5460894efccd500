#include <doctest.h>

#include <random>
#include <sstream>
#include <unordered_set>

#include "test_support.hpp"
#include "tweetlens/corpus.hpp"
#include "tweetlens/errors.hpp"
#include "tweetlens/text.hpp"

using namespace tweetlens;

namespace {

std::string line(const std::string& id, const std::string& text, const std::string& date = "2020-05-20T10:00:00Z",
                 const std::string& extra = "") {
  return R"({"id":")" + id + R"(","text":")" + text + R"(","lang":"en","created_at":")" + date +
         R"(","author_id":"u1","author_followers":10,"author_location":null,"kind":"original","ref_tweet_id":null,"ref_author_id":null)" +
         extra + "}\n";
}

Tweet make_tweet(const std::string& id, const std::string& text, const std::string& date = "2020-05-20T10:00:00Z") {
  Tweet t;
  t.id = id;
  t.text = text;
  t.lang = "en";
  t.created_at = parse_timestamp(date);
  t.author_id = "u" + id;
  return t;
}

TimeWindow paper_window() {
  return make_window(parse_timestamp("2020-05-01"), parse_window_end("2020-06-15"));
}

}  // namespace

TEST_CASE("load_jsonl contract") {
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK(read_jsonl(in).tweets.empty());
  }
  SUBCASE("three valid lines keep order, unknown fields ignored") {
    std::istringstream in(line("1", "a") + line("2", "b", "2020-05-21T00:00:00Z", R"(,"extra":[1,2])") + line("3", "c"));
    const Corpus c = read_jsonl(in);
    REQUIRE(c.tweets.size() == 3);
    CHECK(c.tweets[0].id == "1");
    CHECK(c.tweets[1].id == "2");
    CHECK(c.tweets[2].text == "c");
  }
  SUBCASE("missing id reports the field and line") {
    std::istringstream in(line("1", "a") + R"({"text":"x","lang":"en","created_at":"2020-05-20T00:00:00Z","author_id":"u","author_followers":1,"kind":"original"})" + "\n");
    try {
      read_jsonl(in);
      FAIL("expected MissingField");
    } catch (const MissingField& e) {
      CHECK(e.field() == "id");
      CHECK(e.line_no() == 2);
    }
  }
  SUBCASE("malformed JSON reports the line") {
    std::istringstream in(line("1", "a") + line("2", "b") + "{not json\n");
    try {
      read_jsonl(in);
      FAIL("expected MalformedLine");
    } catch (const MalformedLine& e) {
      CHECK(e.line_no() == 3);
    }
  }
  SUBCASE("retweets require their reference fields") {
    std::istringstream in(
        R"({"id":"9","text":"RT x","lang":"en","created_at":"2020-05-20T00:00:00Z","author_id":"u","author_followers":1,"author_location":null,"kind":"retweet","ref_tweet_id":null,"ref_author_id":"v"})"
        "\n");
    CHECK_THROWS_AS(read_jsonl(in), MissingField);
  }
  SUBCASE("duplicate ids are rejected") {
    std::istringstream in(line("1", "a") + line("1", "b"));
    CHECK_THROWS_AS(read_jsonl(in), MalformedLine);
  }
}

TEST_CASE("JSON round trip of a tweet") {
  Tweet t = make_tweet("77", "hello \"world\"");
  t.kind = TweetKind::Reply;
  t.ref_tweet_id = "5";
  t.ref_author_id = "u5";
  t.author_location = "Kolkata, India";
  t.author_followers = 12345;
  CHECK(tweet_from_json(tweet_to_json(t), 1) == t);
}

TEST_CASE("timestamps") {
  CHECK(format_timestamp(parse_timestamp("2020-05-20T13:45:07Z")) == "2020-05-20T13:45:07Z");
  CHECK(format_timestamp(parse_timestamp("2020-05-20T13:45:07.123+00:00")) == "2020-05-20T13:45:07Z");
  CHECK(format_timestamp(parse_window_end("2020-06-15")) == "2020-06-15T23:59:59Z");
  CHECK_THROWS_AS(parse_timestamp("2020-13-01"), InputError);
  CHECK_THROWS_AS(parse_timestamp("2020-05-20T10:00:00+05:30"), InputError);
}

TEST_CASE("filter_corpus") {
  Corpus c;
  c.tweets = {make_tweet("1", "Amphan landfall today", "2020-05-20T08:00:00Z"),
              make_tweet("2", "cyclone nisarga hits", "2020-06-03T08:00:00Z"),
              make_tweet("3", "early warning", "2020-04-30T23:59:59Z"),
              make_tweet("4", "last day", "2020-06-15T22:00:00Z"),
              make_tweet("5", "too late", "2020-06-16T00:00:00Z"),
              make_tweet("6", "NISARGA upper case", "2020-06-03T08:00:00Z")};

  SUBCASE("window and exclusion terms") {
    const Corpus out = filter_corpus(c, paper_window(), {"nisarga"});
    std::vector<std::string> ids;
    for (const auto& t : out.tweets) ids.push_back(t.id);
    CHECK(ids == std::vector<std::string>{"1", "4"});
  }
  SUBCASE("identity with no terms and a covering window") {
    const auto wide = make_window(parse_timestamp("2000-01-01"), parse_timestamp("2100-01-01"));
    CHECK(filter_corpus(c, wide, {}).tweets == c.tweets);
  }
  SUBCASE("idempotent") {
    const Corpus once = filter_corpus(c, paper_window(), {"nisarga"});
    CHECK(filter_corpus(once, paper_window(), {"nisarga"}).tweets == once.tweets);
  }
  SUBCASE("invalid window") {
    CHECK_THROWS_AS(make_window(parse_timestamp("2020-06-15"), parse_timestamp("2020-05-01")), InvalidWindow);
    TimeWindow bad{parse_timestamp("2020-06-15"), parse_timestamp("2020-05-01")};
    CHECK_THROWS_AS(filter_corpus(c, bad, {}), InvalidWindow);
  }
}

TEST_CASE("dedupe_unique_texts") {
  SUBCASE("retweets collapse onto their source") {
    Corpus c;
    c.tweets.push_back(make_tweet("1", "Roof gone in Khejuri"));
    for (int i = 0; i < 5; ++i) c.tweets.push_back(make_tweet(std::to_string(10 + i), "RT @u" + std::to_string(i) + ": Roof gone in Khejuri"));
    c.tweets.push_back(make_tweet("20", "Something else"));
    const Corpus out = dedupe_unique_texts(c);
    REQUIRE(out.tweets.size() == 2);
    CHECK(out.tweets[0].id == "1");
    CHECK(out.tweets[1].id == "20");
  }
  SUBCASE("all distinct is identity") {
    Corpus c;
    for (int i = 0; i < 20; ++i) c.tweets.push_back(make_tweet(std::to_string(i), "text " + std::to_string(i)));
    CHECK(dedupe_unique_texts(c).tweets == c.tweets);
  }
  SUBCASE("10k tweets over 1k texts matches a set-of-strings oracle") {
    std::mt19937_64 rng(5);
    std::vector<std::string> texts;
    for (int i = 0; i < 1000; ++i) texts.push_back("tweet number " + std::to_string(i) + " " + testing::random_word(rng));
    std::uniform_int_distribution<std::size_t> pick(0, texts.size() - 1);
    Corpus c;
    for (int i = 0; i < 10000; ++i) {
      // guarantee every text appears at least once
      const std::string& t = i < 1000 ? texts[static_cast<std::size_t>(i)] : texts[pick(rng)];
      c.tweets.push_back(make_tweet(std::to_string(i), (i % 3 == 0 ? "RT @someone " : "") + t));
    }
    std::unordered_set<std::string> oracle;
    for (const auto& t : c.tweets) oracle.insert(clean_text(t.text, CleanProfile::Light));
    const Corpus out = dedupe_unique_texts(c);
    CHECK(out.tweets.size() == oracle.size());
    CHECK(out.tweets.size() == 1000);
    std::unordered_set<std::string> seen;
    for (const auto& t : out.tweets) CHECK(seen.insert(clean_text(t.text, CleanProfile::Light)).second);
  }
}

namespace {

class CountingTranslator : public TranslatorBackend {
 public:
  std::string name() const override { return "mock"; }
  std::string translate(std::string_view, std::string_view) override {
    ++calls;
    return "X";
  }
  int calls = 0;
};

class DownTranslator : public TranslatorBackend {
 public:
  std::string name() const override { return "down"; }
  std::string translate(std::string_view, std::string_view) override { throw BackendUnavailable("offline"); }
};

}  // namespace

TEST_CASE("translate") {
  CountingTranslator mock;
  Tweet en = make_tweet("1", "already english");
  CHECK(translate(en, mock) == en);
  CHECK(mock.calls == 0);

  IdentityTranslator identity;
  Tweet bn = make_tweet("2", "\xE0\xA6\x98\xE0\xA7\x82\xE0\xA6\xB0\xE0\xA7\x8D\xE0\xA6\xA3\xE0\xA6\xBF\xE0\xA6\x9D\xE0\xA6\xA1\xE0\xA6\xBC");
  bn.lang = "bn";
  const Tweet out = translate(bn, identity);
  CHECK(out.text == bn.text);
  CHECK(out.lang == "en");

  Tweet hi = make_tweet("3", "something");
  hi.lang = "hi";
  CHECK(translate(hi, mock).text == "X");
  CHECK(mock.calls == 1);

  DownTranslator down;
  CHECK_THROWS_AS(translate(hi, down), BackendUnavailable);
  Corpus c;
  c.tweets = {hi};
  CHECK_THROWS_AS(preprocess(c, down), BackendUnavailable);
  CHECK(preprocess(c, down, {.skip_translation_errors = true}).size() == 1);
}

TEST_CASE("preprocess fills both cleaned forms and tokens; JSON round trip") {
  Corpus c;
  c.tweets = {make_tweet("1", "RT @user Amphan destroyed homes! https://t.co/x #amphan")};
  IdentityTranslator identity;
  const auto processed = preprocess(c, identity);
  REQUIRE(processed.size() == 1);
  CHECK(processed[0].clean_full == "amphan destroyed home");
  CHECK(processed[0].clean_light == "Amphan destroyed homes!");
  CHECK(processed[0].tokens == std::vector<std::string>{"amphan", "destroyed", "home"});

  std::stringstream ss;
  write_processed_jsonl(ss, processed);
  const auto back = read_processed_jsonl(ss);
  REQUIRE(back.size() == 1);
  CHECK(back[0].tweet == processed[0].tweet);
  CHECK(back[0].tokens == processed[0].tokens);
}

TEST_CASE("id ordering is numeric for numeric ids") {
  CHECK(id_less("9", "10"));
  CHECK_FALSE(id_less("10", "9"));
  CHECK(id_less("100", "101"));
}
