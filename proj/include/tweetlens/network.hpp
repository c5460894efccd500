#pragma once
// User interaction graph weighted by embedding distance, discourse and
// community clustering, and per-cluster influencer ranking.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tweetlens/annotate.hpp"
#include "tweetlens/corpus.hpp"
#include "tweetlens/embed.hpp"
#include "tweetlens/project.hpp"

namespace tweetlens {

inline constexpr double kDistanceEpsilon = 1e-8;

struct GraphNode {
  std::string user_id;
  std::vector<double> vector;
  double x = 0;
  double y = 0;
  std::uint64_t followers = 0;
  std::size_t tweet_count = 0;
};

struct GraphEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::uint64_t interaction_count = 0;
  double weight = 0;
  bool epsilon_guarded = false;  // distance fell below kDistanceEpsilon
};

struct UserGraph {
  std::vector<GraphNode> nodes;  // ordered by user id
  std::vector<GraphEdge> edges;  // ordered by (src, dst)
  std::size_t dropped_interactions = 0;  // an endpoint had no user vector

  // -1 when absent.
  long index_of(const std::string& user_id) const;
  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Retweets and replies become u -> v edges toward ref_author_id; self
// interactions are ignored. weight = count / max(dist, kDistanceEpsilon) on
// the user vectors. Layout points missing for a user leave (0, 0).
UserGraph build_user_graph(std::span<const Tweet> tweets, const std::vector<UserVector>& users,
                           const std::vector<LayoutPoint>& layout);

// Undirected projection: w(u,v) = w(u->v) + w(v->u).
struct SymmetricGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // sorted by neighbour
  double weight(std::size_t u, std::size_t v) const;
};

SymmetricGraph symmetrize(const UserGraph& g);

enum class ClusterMethod { Discourse, Community };

std::string_view to_string(ClusterMethod m) noexcept;

struct Clustering {
  ClusterMethod method = ClusterMethod::Discourse;
  std::vector<std::string> user_ids;
  std::vector<int> labels;  // aligned with user_ids, numbered by first appearance
  double quality = 0;       // silhouette or modularity
  double inertia = 0;       // k-means only

  int label_of(const std::string& user_id) const;
  int cluster_count() const;
};

struct KMeansResult {
  std::vector<int> labels;
  std::vector<double> centroids;  // k x dim
  double inertia = 0;
};

// k-means++ seeding, Lloyd iterations, `restarts` independent runs, lowest
// inertia kept. Throws KTooLarge when k > n.
KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, int restarts = 10, int max_iter = 300);

// Mean silhouette with Euclidean distance; members of singleton clusters score 0.
double silhouette(const Matrix& x, const std::vector<int>& labels);

Clustering cluster_discourse(const std::vector<UserVector>& users, std::size_t k, std::uint64_t seed);

// Louvain: local moves, then aggregation, until nothing improves.
std::vector<int> louvain(const SymmetricGraph& g);
double modularity(const SymmetricGraph& g, const std::vector<int>& labels);

Clustering cluster_community(const UserGraph& g);

// Sentiment and label attachments aggregated per author.
struct UserAnnotationSummary {
  std::size_t tweets = 0;
  double compound_sum = 0;
  std::map<std::string, std::size_t> labels;

  double mean_compound() const { return tweets == 0 ? 0.0 : compound_sum / static_cast<double>(tweets); }
};

std::unordered_map<std::string, UserAnnotationSummary> summarize_user_annotations(
    std::span<const Tweet> tweets, std::span<const Annotation> annotations);

struct Centrality {
  std::vector<double> weighted_degree;
  std::vector<std::size_t> degree;
  std::vector<double> eigenvector;  // unit L2 norm
};

// Power iteration on (A + I), at most 100 rounds, tolerance 1e-8.
Centrality centralities(const SymmetricGraph& g);

struct InfluencerEntry {
  std::string user_id;
  double weighted_degree = 0;
  std::size_t degree = 0;
  double eigenvector = 0;
  std::uint64_t followers = 0;
  double mean_sentiment = 0;
  std::map<std::string, std::size_t> labels;
};

struct ClusterInfluence {
  int cluster = 0;
  std::size_t size = 0;
  double mean_sentiment = 0;  // over the members' annotated tweets
  std::map<std::string, std::size_t> labels;
  std::vector<InfluencerEntry> ranked;  // top_k
};

struct InfluencerReport {
  ClusterMethod method = ClusterMethod::Discourse;
  std::vector<ClusterInfluence> clusters;
};

// Orders by weighted degree descending, then followers descending, then user id.
InfluencerReport rank_influencers(const UserGraph& g, const Clustering& cl,
                                  const std::unordered_map<std::string, UserAnnotationSummary>& summaries,
                                  std::size_t top_k);

nlohmann::json influencers_to_json(const InfluencerReport& r);

void write_edges_csv(std::ostream& out, const UserGraph& g);
void write_nodes_csv(std::ostream& out, const UserGraph& g, const Clustering& discourse, const Clustering& community,
                     const std::unordered_map<std::string, UserAnnotationSummary>& summaries);

}  // namespace tweetlens
