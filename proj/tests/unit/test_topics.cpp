#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <random>
#include <thread>

#include <json.hpp>

#include "test_support.hpp"
#include "tweetlens/annotate.hpp"
#include "tweetlens/errors.hpp"
#include "tweetlens/topics.hpp"

using namespace tweetlens;
using nlohmann::json;

namespace {

// Returns a fixed score table for every sequence.
class InjectedBackend : public ClassifierBackend {
 public:
  explicit InjectedBackend(LabelScores scores) : scores_(std::move(scores)) {}
  BackendInfo info() override { return {"injected", "1"}; }
  std::vector<LabelScores> classify_batch(std::span<const std::string> sequences, const LabelSet&) override {
    ++calls;
    return std::vector<LabelScores>(sequences.size(), scores_);
  }
  int calls = 0;

 private:
  LabelScores scores_;
};

LabelScores zeros() {
  LabelScores s;
  for (const auto& l : default_labels()) s[l] = 0.0;
  return s;
}

}  // namespace

TEST_CASE("the default label set has the 25 labels in canonical order") {
  const auto& labels = default_labels();
  REQUIRE(labels.size() == 25);
  CHECK(labels.front() == "sympathy");
  CHECK(labels[14] == "housing");
  CHECK(labels.back() == "assistance required");
  CHECK(kDefaultAlpha == 0.7);
}

TEST_CASE("assign_topics thresholds injected scores") {
  SUBCASE("alpha 0.7 picks housing only") {
    auto s = zeros();
    s["housing"] = 0.91;
    s["hope"] = 0.20;
    InjectedBackend backend(s);
    const auto a = assign_topics("my house is gone", default_labels(), 0.7, backend);
    CHECK(a.assigned == std::vector<std::string>{"housing"});
    CHECK(a.alpha == 0.7);
  }
  SUBCASE("all zero -> nothing") {
    InjectedBackend backend(zeros());
    CHECK(assign_topics("x", default_labels(), 0.7, backend).assigned.empty());
  }
  SUBCASE("alpha 0 -> every label") {
    InjectedBackend backend(zeros());
    CHECK(assign_topics("x", default_labels(), 0.0, backend).assigned == default_labels());
  }
  SUBCASE("score equal to alpha is assigned") {
    auto s = zeros();
    s["farm"] = 0.7;
    InjectedBackend backend(s);
    CHECK(assign_topics("x", default_labels(), 0.7, backend).assigned == std::vector<std::string>{"farm"});
  }
  SUBCASE("out-of-range scores violate the contract") {
    auto s = zeros();
    s["farm"] = 1.2;
    InjectedBackend backend(s);
    CHECK_THROWS_AS(assign_topics("x", default_labels(), 0.7, backend), BackendContractViolation);
  }
  SUBCASE("missing label violates the contract") {
    auto s = zeros();
    s.erase("farm");
    InjectedBackend backend(s);
    CHECK_THROWS_AS(assign_topics("x", default_labels(), 0.7, backend), BackendContractViolation);
  }
  SUBCASE("alpha outside [0,1]") {
    InjectedBackend backend(zeros());
    CHECK_THROWS_AS(assign_topics("x", default_labels(), 1.5, backend), InputError);
  }
}

TEST_CASE("property: assignment is recomputable and monotone in alpha") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    LabelScores s;
    for (const auto& l : default_labels()) s[l] = u(rng);
    std::vector<std::vector<std::string>> by_alpha;
    for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
      const auto a = threshold_scores(s, default_labels(), alpha);
      std::vector<std::string> oracle;
      for (const auto& l : default_labels()) {
        if (s[l] >= alpha) oracle.push_back(l);
      }
      CHECK(a.assigned == oracle);
      by_alpha.push_back(a.assigned);
    }
    for (std::size_t i = 1; i < by_alpha.size(); ++i) {
      for (const auto& l : by_alpha[i]) {
        CHECK(std::find(by_alpha[i - 1].begin(), by_alpha[i - 1].end(), l) != by_alpha[i - 1].end());
      }
    }
  }
}

TEST_CASE("keyword backend") {
  KeywordBackend backend({{"housing", {"house", "flood"}}, {"hope", {"hope"}}});
  SUBCASE("h / (h + 1)") {
    const auto s = backend.classify("house destroyed flood", {"housing", "hope"});
    CHECK(s.at("housing") == doctest::Approx(2.0 / 3.0));
    CHECK(s.at("hope") == 0.0);
  }
  SUBCASE("enumerated hit counts against the formula; alpha 0.7 needs 3 hits") {
    for (int h = 0; h <= 9; ++h) {
      std::string text;
      for (int i = 0; i < h; ++i) text += "house ";
      text += "unrelated words";
      const double score = backend.classify(text, {"housing"}).at("housing");
      CHECK(score == doctest::Approx(static_cast<double>(h) / (h + 1)));
      CHECK((score >= 0.7) == (h >= 3));
    }
  }
  SUBCASE("inflected forms match through normalization") {
    CHECK(backend.classify("Houses FLOODS!", {"housing"}).at("housing") == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("empty lexicon entries are rejected") {
    CHECK_THROWS_AS(KeywordBackend(std::map<std::string, std::vector<std::string>>{{"housing", {}}}), EmptyLexicon);
    CHECK_THROWS_AS(KeywordBackend(std::map<std::string, std::vector<std::string>>{{"housing", {"the", "and"}}}), EmptyLexicon);
    CHECK_THROWS_AS(backend.classify("x", {"farm"}), EmptyLexicon);
  }
  SUBCASE("builtin lexicon covers the default labels") {
    auto builtin = KeywordBackend::builtin();
    const auto s = builtin.classify("My house roof collapsed and our home is flooded", default_labels());
    CHECK(s.size() == 25);
    CHECK(s.at("housing") >= 0.7);
    for (const auto& [label, v] : s) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("batched assignment is aligned and respects backend batch size") {
  InjectedBackend backend(zeros());
  std::vector<std::string> texts(130, "x");
  const auto out = assign_topics_batch(texts, default_labels(), 0.7, backend, {.batch_size = 64, .max_in_flight = 3});
  CHECK(out.size() == 130);
  CHECK(backend.calls == 3);
}

TEST_CASE("make_backend specs") {
  CHECK(make_backend("keyword")->info().name == "keyword");
  CHECK_THROWS_AS(make_backend("bogus"), InputError);
  CHECK_THROWS_AS(make_backend("keyword:/nonexistent.json"), InputError);
}

// ------------------------------------------------------------- remote surface

namespace {

// Stand-in for the NLI service: scores a label 0.9 when the label text occurs
// in the sequence, else 0.1.
class MockService {
 public:
  explicit MockService(bool broken_scores = false) {
    server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      json body = {{"status", "ok"}, {"model", "mock-nli"}, {"version", "rev-1"}};
      res.status = ready_ ? 200 : 503;
      res.set_content(body.dump(), "application/json");
    });
    server_.Post("/classify_batch", [this, broken_scores](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (!ready_) {
        res.status = 503;
        return;
      }
      const json batch = json::parse(req.body);
      if (batch.size() > 64) {
        res.status = 413;
        return;
      }
      json out = json::array();
      for (const auto& item : batch) {
        const auto seq = item.at("sequence").get<std::string>();
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& label : item.at("candidate_labels")) {
          const auto l = label.get<std::string>();
          ranked.emplace_back(broken_scores ? 1.5 : (seq.find(l) != std::string::npos ? 0.9 : 0.1), l);
        }
        std::stable_sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.first > b.first; });
        json labels = json::array();
        json scores = json::array();
        for (auto& [s, l] : ranked) {
          labels.push_back(l);
          scores.push_back(s);
        }
        out.push_back({{"labels", labels}, {"scores", scores}, {"model", {{"name", "mock-nli"}, {"version", "rev-1"}}}});
      }
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  void set_ready(bool r) { ready_ = r; }
  int requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<bool> ready_{true};
  std::atomic<int> requests_{0};
};

}  // namespace

TEST_CASE("remote backend speaks the service wire format") {
  MockService service;
  RemoteBackend backend(service.url());
  CHECK(backend.info().name == "remote:mock-nli");
  CHECK(backend.info().version == "rev-1");

  const auto a = assign_topics("the housing block flooded", {"housing", "hope"}, 0.7, backend);
  CHECK(a.assigned == std::vector<std::string>{"housing"});
  CHECK(a.scores.at("hope") == doctest::Approx(0.1));

  std::vector<std::string> texts;
  for (int i = 0; i < 150; ++i) texts.push_back(i % 2 ? "need food supply" : "hope for all");
  const auto out = assign_topics_batch(texts, default_labels(), 0.7, backend, {.batch_size = 64, .max_in_flight = 2});
  REQUIRE(out.size() == 150);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].assigned == std::vector<std::string>{i % 2 ? "food supply" : "hope"});
  }
}

TEST_CASE("remote backend error mapping") {
  SUBCASE("service loading -> unavailable") {
    MockService service;
    service.set_ready(false);
    RemoteBackend backend(service.url());
    CHECK_THROWS_AS(backend.info(), BackendUnavailable);
    CHECK_THROWS_AS(assign_topics("x", {"housing"}, 0.7, backend), BackendUnavailable);
  }
  SUBCASE("nobody listening -> unavailable") {
    RemoteBackend backend("http://127.0.0.1:1", {.max_batch = 64, .timeout_seconds = 2});
    CHECK_THROWS_AS(assign_topics("x", {"housing"}, 0.7, backend), BackendUnavailable);
  }
  SUBCASE("scores outside [0,1] -> contract violation") {
    MockService service(true);
    RemoteBackend backend(service.url());
    CHECK_THROWS_AS(assign_topics("x", {"housing"}, 0.7, backend), BackendContractViolation);
  }
}

TEST_CASE("annotate_corpus orders by id, shares backend calls and round-trips") {
  auto s = zeros();
  s["housing"] = 0.8;
  InjectedBackend backend(s);
  std::vector<ProcessedTweet> tweets(3);
  const char* ids[] = {"10", "9", "11"};
  const char* texts[] = {"My roof is gone!", "My roof is gone!", "They are fine."};
  for (int i = 0; i < 3; ++i) {
    tweets[i].tweet.id = ids[i];
    tweets[i].clean_light = texts[i];
  }
  const auto out = annotate_corpus(tweets, backend);
  REQUIRE(out.size() == 3);
  CHECK(out[0].tweet_id == "9");
  CHECK(out[1].tweet_id == "10");
  CHECK(out[2].tweet_id == "11");
  CHECK(out[0].pov == PovClass::First);
  CHECK(out[2].pov == PovClass::Third);
  CHECK(out[0].topics.assigned == std::vector<std::string>{"housing"});
  CHECK(out[0].backend.name == "injected");

  std::stringstream ss;
  write_annotations_jsonl(ss, out);
  const auto back = read_annotations_jsonl(ss);
  REQUIRE(back.size() == 3);
  CHECK(back[1].sentiment.compound == out[1].sentiment.compound);
  CHECK(back[1].topics.scores == out[1].topics.scores);
  CHECK(back[1].pov == out[1].pov);
}
