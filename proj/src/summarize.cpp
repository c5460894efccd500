#include "tweetlens/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "parallel.hpp"
#include "tweetlens/errors.hpp"
#include "tweetlens/simd.hpp"
#include "tweetlens/text.hpp"

namespace tweetlens {

void validate(const SummaryConfig& cfg) {
  if (cfg.k < 1) throw InputError("summary length k must be at least 1");
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw InputError("similarity threshold tau must lie in (0, 1)");
}

SimilarityGraph build_similarity_graph(const std::vector<std::string>& ids,
                                       const std::vector<std::vector<double>>& vectors, double tau) {
  if (ids.size() != vectors.size()) throw InputError("ids and vectors differ in length");
  SimilarityGraph g;
  std::vector<const std::vector<double>*> kept;
  std::vector<double> norms;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double n = simd::norm(vectors[i]);
    if (n == 0.0) {
      g.excluded_zero.push_back(ids[i]);
      continue;
    }
    g.ids.push_back(ids[i]);
    kept.push_back(&vectors[i]);
    norms.push_back(n);
  }
  const std::size_t n = kept.size();
  g.adj.assign(n, {});
  detail::parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double cos = simd::dot(*kept[i], *kept[j]) / (norms[i] * norms[j]);
      if (cos > tau) g.adj[i].push_back(j);
    }
  }, 16);
  return g;
}

std::vector<std::vector<std::size_t>> connected_components(const SimilarityGraph& g) {
  const std::size_t n = g.adj.size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp{s}, stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : g.adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          comp.push_back(v);
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

std::vector<SummaryCandidate> component_representatives(const SimilarityGraph& g,
                                                        const std::vector<std::size_t>& lengths) {
  const std::size_t n = g.adj.size();
  if (lengths.size() != n) throw InputError("lengths must align with graph nodes");
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  struct Picked {
    SummaryCandidate cand;
    const std::string* min_id;
  };
  std::vector<Picked> picked;
  for (const auto& comp : connected_components(g)) {
    const std::string* min_id = &g.ids[comp.front()];
    SummaryCandidate best;
    bool have = false;
    for (std::size_t v : comp) {
      if (lengths[v] < 1) throw InputError("tweet " + g.ids[v] + " has no tokens");
      if (id_less(g.ids[v], *min_id)) min_id = &g.ids[v];
      SummaryCandidate c;
      c.tweet_id = g.ids[v];
      c.c = static_cast<double>(g.adj[v].size()) / denom;
      c.s = std::log(static_cast<double>(lengths[v]));
      c.score = c.c + c.s;
      c.tweet_length = lengths[v];
      c.component_size = comp.size();
      if (!have || c.score > best.score || (c.score == best.score && id_less(c.tweet_id, best.tweet_id))) {
        best = std::move(c);
        have = true;
      }
    }
    picked.push_back({std::move(best), min_id});
  }
  std::sort(picked.begin(), picked.end(), [](const Picked& a, const Picked& b) {
    if (a.cand.component_size != b.cand.component_size) return a.cand.component_size > b.cand.component_size;
    return id_less(*a.min_id, *b.min_id);
  });
  std::vector<SummaryCandidate> out;
  for (auto& p : picked) out.push_back(std::move(p.cand));
  return out;
}

Summary summarize_inputs(const std::string& label, const std::vector<SummaryInput>& inputs, const SummaryConfig& cfg) {
  validate(cfg);
  if (inputs.empty()) throw NoQualifyingTweets(label);
  Summary s;
  s.label = label;
  s.k = cfg.k;
  s.tau = cfg.tau;
  s.qualifying = inputs.size();

  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  std::unordered_map<std::string, const SummaryInput*> by_id;
  for (const auto& in : inputs) {
    ids.push_back(in.tweet_id);
    vectors.push_back(in.vector);
    by_id.emplace(in.tweet_id, &in);
  }
  const auto g = build_similarity_graph(ids, vectors, cfg.tau);
  if (!g.excluded_zero.empty()) {
    s.warnings.push_back(std::to_string(g.excluded_zero.size()) + " tweets had no in-vocabulary words and were left out");
  }
  std::vector<std::size_t> lengths;
  for (const auto& id : g.ids) lengths.push_back(by_id.at(id)->length);
  const auto reps = component_representatives(g, lengths);
  for (const auto& r : reps) s.component_sizes.push_back(r.component_size);
  for (std::size_t i = 0; i < reps.size() && i < cfg.k; ++i) {
    const auto* in = by_id.at(reps[i].tweet_id);
    s.representatives.push_back({reps[i], in->text, in->location});
  }
  return s;
}

Summary summarize_label(const std::string& label, std::span<const ProcessedTweet> tweets,
                        std::span<const Annotation> annotations, const EmbeddingModel& model,
                        const SummaryConfig& cfg) {
  std::unordered_map<std::string, const Annotation*> ann;
  for (const auto& a : annotations) ann.emplace(a.tweet_id, &a);
  std::vector<const ProcessedTweet*> qualifying;
  std::unordered_set<std::string> seen_text;
  for (const auto& p : tweets) {
    const auto it = ann.find(p.tweet.id);
    if (it == ann.end() || it->second->pov != PovClass::First) continue;
    const auto& assigned = it->second->topics.assigned;
    if (std::find(assigned.begin(), assigned.end(), label) == assigned.end()) continue;
    if (!seen_text.insert(p.clean_light).second) continue;
    qualifying.push_back(&p);
  }
  std::sort(qualifying.begin(), qualifying.end(),
            [](const ProcessedTweet* a, const ProcessedTweet* b) { return id_less(a->tweet.id, b->tweet.id); });
  std::vector<SummaryInput> inputs;
  std::size_t empty = 0;
  for (const auto* p : qualifying) {
    SummaryInput in;
    in.tweet_id = p->tweet.id;
    in.text = p->tweet.text;
    in.location = p->tweet.author_location.value_or("");
    in.length = tokenize(p->clean_light).size();
    if (in.length == 0) {
      ++empty;
      continue;
    }
    in.vector = infer_vector(model, p->tokens).vector;
    inputs.push_back(std::move(in));
  }
  auto s = summarize_inputs(label, inputs, cfg);
  if (empty > 0) s.warnings.push_back(std::to_string(empty) + " tweets were empty after cleaning and were left out");
  return s;
}

nlohmann::json summary_to_json(const Summary& s) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : s.representatives) {
    reps.push_back({{"tweet_id", r.candidate.tweet_id},
                    {"text", r.text},
                    {"location", r.location},
                    {"score", r.candidate.score},
                    {"degree_centrality", r.candidate.c},
                    {"tweet_length", r.candidate.tweet_length},
                    {"component_size", r.candidate.component_size}});
  }
  return {{"label", s.label},
          {"k", s.k},
          {"tau", s.tau},
          {"qualifying", s.qualifying},
          {"component_sizes", s.component_sizes},
          {"representatives", reps},
          {"warnings", s.warnings}};
}

}  // namespace tweetlens
