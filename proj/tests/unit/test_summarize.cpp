#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "synthetic.hpp"
#include "oracles.hpp"
#include "tweetlens/errors.hpp"
#include "tweetlens/summarize.hpp"

using namespace tweetlens;
using namespace tweetlens::testing;

namespace {

std::vector<double> unit(std::size_t dim, std::size_t axis) {
  std::vector<double> v(dim, 0.0);
  v[axis] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("similarity graph edges") {
  SUBCASE("identical vectors connect, orthogonal ones do not, zero vectors are excluded") {
    const auto g = build_similarity_graph({"1", "2", "3", "4"}, {{1, 2, 3}, {1, 2, 3}, {0, 0, 0}, {3, 0, -1}}, 0.6);
    CHECK(g.ids == std::vector<std::string>{"1", "2", "4"});
    CHECK(g.excluded_zero == std::vector<std::string>{"3"});
    CHECK(g.adj[0] == std::vector<std::size_t>{1});
    CHECK(g.adj[2].empty());
  }
  SUBCASE("100 random vectors match the O(n^2) cosine oracle; raising tau never adds degree") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> vecs;
    for (int i = 0; i < 100; ++i) {
      ids.push_back(std::to_string(i + 1));
      std::vector<double> v(10);
      for (auto& x : v) x = gauss(rng) + 1.0;
      vecs.push_back(v);
    }
    const auto g = build_similarity_graph(ids, vecs, 0.6);
    std::size_t oracle_edges = 0, edges = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      edges += g.adj[i].size();
      for (std::size_t j = 0; j < 100; ++j) {
        if (i == j) continue;
        double xy = 0, xx = 0, yy = 0;
        for (std::size_t c = 0; c < 10; ++c) {
          xy += vecs[i][c] * vecs[j][c];
          xx += vecs[i][c] * vecs[i][c];
          yy += vecs[j][c] * vecs[j][c];
        }
        const bool edge = xy / std::sqrt(xx * yy) > 0.6;
        oracle_edges += edge;
        CHECK(std::binary_search(g.adj[i].begin(), g.adj[i].end(), j) == edge);
      }
    }
    CHECK(edges == oracle_edges);
    CHECK(edges > 0);
    const auto tighter = build_similarity_graph(ids, vecs, 0.8);
    for (std::size_t i = 0; i < 100; ++i) CHECK(tighter.adj[i].size() <= g.adj[i].size());
  }
}

TEST_CASE("representative scoring") {
  SUBCASE("isolated node") {
    const auto reps = component_representatives(graph_of(1, {}), {20});
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].c == 0.0);
    CHECK(reps[0].score == doctest::Approx(2.9957).epsilon(1e-4));
  }
  SUBCASE("degree decides at equal length") {
    // a = node 0 with degree 4, b = node 1 with degree 1, N = 11.
    const auto g = graph_of(11, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    std::vector<std::size_t> len(11, 10);
    const auto reps = component_representatives(g, len);
    CHECK(reps[0].tweet_id == "1");
    CHECK(reps[0].c == 0.4);
    CHECK(reps[0].component_size == 5);
    CHECK(reps.size() == 7);
  }
  SUBCASE("ties go to the smaller id") {
    const auto reps = component_representatives(graph_of(2, {{0, 1}}), {5, 5});
    CHECK(reps[0].tweet_id == "1");
  }
  SUBCASE("zero-length tweets are rejected") {
    CHECK_THROWS_AS(component_representatives(graph_of(1, {}), {0}), InputError);
  }
}

TEST_CASE("random 200-node graphs: representatives equal the exhaustive argmax") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> node(0, 199);
    std::uniform_int_distribution<std::size_t> length(1, 40);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (int i = 0; i < 180; ++i) {
      auto a = node(rng), b = node(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (seen.insert({a, b}).second) edges.emplace_back(a, b);
    }
    const auto g = graph_of(200, edges);
    std::vector<std::size_t> len(200);
    for (auto& l : len) l = length(rng);
    const auto reps = component_representatives(g, len);
    const auto oracle = argmax_oracle(g, len);
    REQUIRE(reps.size() == oracle.size());
    std::set<std::string> expected;
    for (auto [root, v] : oracle) expected.insert(g.ids[v]);
    std::set<std::string> got;
    for (const auto& r : reps) {
      got.insert(r.tweet_id);
      CHECK(r.score == r.c + r.s);
      CHECK(r.s == std::log(static_cast<double>(r.tweet_length)));
    }
    CHECK(got == expected);
    for (std::size_t i = 1; i < reps.size(); ++i) CHECK(reps[i - 1].component_size >= reps[i].component_size);

    // Representative optimality, restated per component.
    for (const auto& comp : connected_components(g)) {
      double best = -1;
      for (auto v : comp) best = std::max(best, static_cast<double>(g.adj[v].size()) / 199.0 + std::log(static_cast<double>(len[v])));
      const auto it = std::find_if(reps.begin(), reps.end(), [&](const SummaryCandidate& r) {
        return std::any_of(comp.begin(), comp.end(), [&](std::size_t v) { return g.ids[v] == r.tweet_id; });
      });
      REQUIRE(it != reps.end());
      CHECK(it->score == best);
    }
  }
}

TEST_CASE("summary truncation and ordering") {
  SummaryConfig cfg;
  SUBCASE("three dissimilar tweets, k = 50 -> three singletons") {
    std::vector<SummaryInput> in = {{"1", "a", "Kolkata", 3, unit(3, 0)}, {"2", "b", "", 4, unit(3, 1)}, {"3", "c", "", 5, unit(3, 2)}};
    const auto s = summarize_inputs("housing", in, cfg);
    CHECK(s.representatives.size() == 3);
    CHECK(s.representatives[0].candidate.tweet_id == "1");
    CHECK(s.representatives[0].location == "Kolkata");
    CHECK(s.component_sizes == std::vector<std::size_t>{1, 1, 1});
  }
  SUBCASE("k = 1 keeps only the largest component") {
    std::vector<SummaryInput> in = {{"1", "a", "", 3, unit(3, 0)}, {"2", "b", "", 4, unit(3, 1)}, {"3", "c", "", 5, unit(3, 1)}};
    cfg.k = 1;
    const auto s = summarize_inputs("housing", in, cfg);
    REQUIRE(s.representatives.size() == 1);
    CHECK(s.representatives[0].candidate.tweet_id == "3");
    CHECK(s.representatives[0].candidate.component_size == 2);
  }
  SUBCASE("|summary| == min(k, components) for every k") {
    std::vector<SummaryInput> in;
    for (std::size_t i = 0; i < 12; ++i) in.push_back({std::to_string(i + 1), "t", "", 2, unit(6, i % 6)});
    for (std::size_t k = 1; k <= 8; ++k) {
      cfg.k = k;
      CHECK(summarize_inputs("x", in, cfg).representatives.size() == std::min<std::size_t>(k, 6));
    }
  }
  SUBCASE("bad config and empty input") {
    cfg.tau = 1.0;
    CHECK_THROWS_AS(summarize_inputs("x", {{"1", "", "", 1, {1.0}}}, cfg), InputError);
    cfg.tau = 0.6;
    cfg.k = 0;
    CHECK_THROWS_AS(summarize_inputs("x", {{"1", "", "", 1, {1.0}}}, cfg), InputError);
    cfg.k = 50;
    CHECK_THROWS_AS(summarize_inputs("x", {}, cfg), NoQualifyingTweets);
  }
}

TEST_CASE("planted paraphrase clusters come before noise singletons") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  const std::size_t dim = 60;
  std::vector<SummaryInput> in;
  std::set<std::string> cluster_ids, noise_ids;
  int next = 1;
  for (std::size_t c = 0; c < 5; ++c) {
    std::vector<double> centre(dim);
    for (auto& x : centre) x = g(rng);
    for (std::size_t m = 0; m < 4 + c; ++m) {
      auto v = centre;
      for (auto& x : v) x += 0.15 * g(rng);
      const auto id = std::to_string(next++);
      cluster_ids.insert(id);
      in.push_back({id, "para", "", 8, v});
    }
  }
  for (int i = 0; i < 40; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    const auto id = std::to_string(next++);
    noise_ids.insert(id);
    in.push_back({id, "noise", "", 8, v});
  }
  std::shuffle(in.begin(), in.end(), rng);
  const auto s = summarize_inputs("housing", in, SummaryConfig{});
  REQUIRE(s.representatives.size() == 45);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(cluster_ids.count(s.representatives[i].candidate.tweet_id) == 1);
    CHECK(s.representatives[i].candidate.component_size == 8 - i);
  }
  for (std::size_t i = 5; i < 45; ++i) CHECK(noise_ids.count(s.representatives[i].candidate.tweet_id) == 1);
}

TEST_CASE("summarize_label keeps first-person tweets with the label, one per text") {
  const auto corpus = topic_corpus(2, 30, 10, 12);
  EmbeddingConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 10;
  const auto model = train(build_training_set(corpus.docs, cfg), cfg);

  std::vector<ProcessedTweet> ps;
  std::vector<Annotation> ann;
  auto add = [&](const std::string& id, const std::string& light, std::size_t doc, PovClass pov,
                 std::vector<std::string> labels) {
    ProcessedTweet p;
    p.tweet.id = id;
    p.tweet.text = "raw " + light;
    p.tweet.author_location = "Khulna";
    p.clean_light = light;
    p.tokens = corpus.docs[doc].tokens;
    ps.push_back(p);
    Annotation a;
    a.tweet_id = id;
    a.pov = pov;
    a.topics.assigned = std::move(labels);
    ann.push_back(a);
  };
  add("1", "my roof is gone", 0, PovClass::First, {"housing"});
  add("2", "my roof is gone", 0, PovClass::First, {"housing"});
  add("3", "their roof is gone", 1, PovClass::Third, {"housing"});
  add("4", "we need food", 2, PovClass::First, {"food supply"});
  add("5", "our walls fell", 40, PovClass::First, {"housing", "hope"});
  add("6", "!!!", 41, PovClass::First, {"housing"});

  const auto s = summarize_label("housing", ps, ann, model, SummaryConfig{});
  CHECK(s.qualifying == 2);
  std::set<std::string> ids;
  for (const auto& r : s.representatives) {
    ids.insert(r.candidate.tweet_id);
    CHECK(r.location == "Khulna");
    CHECK(r.text.rfind("raw ", 0) == 0);
  }
  CHECK(ids.count("2") == 0);
  CHECK(ids.count("3") == 0);
  CHECK(ids.count("4") == 0);
  CHECK_THROWS_AS(summarize_label("farm", ps, ann, model, SummaryConfig{}), NoQualifyingTweets);

  const auto j = summary_to_json(s);
  CHECK(j["label"] == "housing");
  CHECK(j["representatives"].is_array());
}
