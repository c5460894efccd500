#pragma once
// Extractive summaries: cosine similarity graph over tweet vectors, one
// representative per connected component chosen by degree + log length.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tweetlens/annotate.hpp"
#include "tweetlens/embed.hpp"

namespace tweetlens {

struct SummaryConfig {
  std::size_t k = 50;
  double tau = 0.6;
};

void validate(const SummaryConfig& cfg);

struct SimilarityGraph {
  std::vector<std::string> ids;
  std::vector<std::vector<std::size_t>> adj;  // sorted, no self-loops
  std::vector<std::string> excluded_zero;     // zero vectors left out
};

// Edge iff cosine > tau.
SimilarityGraph build_similarity_graph(const std::vector<std::string>& ids,
                                       const std::vector<std::vector<double>>& vectors, double tau);

// Components, each sorted by node index, listed by smallest node index.
std::vector<std::vector<std::size_t>> connected_components(const SimilarityGraph& g);

struct SummaryCandidate {
  std::string tweet_id;
  double c = 0;  // degree / (N - 1)
  double s = 0;  // ln(tweet_length)
  double score = 0;
  std::size_t tweet_length = 0;
  std::size_t component_size = 0;
};

// One representative per component with the highest C + S (ties: smaller id).
// Ordered by component size descending, then by the component's smallest id.
// `lengths` is aligned with g.ids and every entry must be >= 1.
std::vector<SummaryCandidate> component_representatives(const SimilarityGraph& g,
                                                        const std::vector<std::size_t>& lengths);

struct Representative {
  SummaryCandidate candidate;
  std::string text;
  std::string location;
};

struct Summary {
  std::string label;
  std::size_t k = 0;
  double tau = 0;
  std::size_t qualifying = 0;
  std::vector<Representative> representatives;
  std::vector<std::size_t> component_sizes;  // every component, in summary order
  std::vector<std::string> warnings;
};

struct SummaryInput {
  std::string tweet_id;
  std::string text;
  std::string location;
  std::size_t length = 0;
  std::vector<double> vector;
};

Summary summarize_inputs(const std::string& label, const std::vector<SummaryInput>& inputs, const SummaryConfig& cfg);

// First-person tweets carrying `label`, one per LIGHT text. Throws
// NoQualifyingTweets when there are none.
Summary summarize_label(const std::string& label, std::span<const ProcessedTweet> tweets,
                        std::span<const Annotation> annotations, const EmbeddingModel& model,
                        const SummaryConfig& cfg);

nlohmann::json summary_to_json(const Summary& s);

}  // namespace tweetlens
