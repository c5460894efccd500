#include "tweetlens/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "parallel.hpp"
#include "tweetlens/errors.hpp"
#include "tweetlens/simd.hpp"

namespace tweetlens {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// Renumbers labels 0, 1, ... in order of first appearance.
std::vector<int> canonical(const std::vector<int>& labels) {
  std::unordered_map<int, int> map;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = map.emplace(labels[i], static_cast<int>(map.size())).first->second;
  }
  return out;
}

double sq_dist(const Matrix& x, std::size_t i, const double* c) {
  return simd::active().squared_distance(x.row(i), c, x.cols);
}

KMeansResult kmeans_once(const Matrix& x, std::size_t k, std::mt19937_64& rng, int max_iter) {
  const std::size_t n = x.rows, dim = x.cols;
  KMeansResult r;
  r.centroids.assign(k * dim, 0.0);

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  auto pick = [&](std::size_t c, std::size_t i) {
    chosen[i] = true;
    std::copy(x.row(i), x.row(i) + dim, r.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    for (std::size_t j = 0; j < n; ++j) d2[j] = std::min(d2[j], sq_dist(x, j, x.row(i)));
  };
  pick(0, std::min<std::size_t>(static_cast<std::size_t>(uniform01(rng) * n), n - 1));
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t next = n;
    if (total > 0) {
      double target = uniform01(rng) * total;
      for (std::size_t j = 0; j < n; ++j) {
        if (d2[j] <= 0) continue;
        next = j;
        if ((target -= d2[j]) < 0) break;
      }
    } else {
      std::vector<std::size_t> free;
      for (std::size_t j = 0; j < n; ++j) {
        if (!chosen[j]) free.push_back(j);
      }
      next = free[std::min<std::size_t>(static_cast<std::size_t>(uniform01(rng) * free.size()), free.size() - 1)];
    }
    pick(c, next);
  }

  r.labels.assign(n, -1);
  std::vector<double> best_d(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(x, i, r.centroids.data());
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(x, i, r.centroids.data() + c * dim);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      best_d[i] = bd;
      if (r.labels[i] != best) {
        r.labels[i] = best;
        changed = true;
      }
    }
    // Empty clusters take the point farthest from its centroid.
    std::vector<std::size_t> sizes(k, 0);
    for (int l : r.labels) ++sizes[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(r.labels[i])] > 1 && best_d[i] > best_d[far]) far = i;
      }
      --sizes[static_cast<std::size_t>(r.labels[far])];
      r.labels[far] = static_cast<int>(c);
      best_d[far] = 0;
      ++sizes[c];
      changed = true;
    }
    std::fill(r.centroids.begin(), r.centroids.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      simd::active().axpy(1.0, x.row(i), r.centroids.data() + static_cast<std::size_t>(r.labels[i]) * dim, dim);
    }
    for (std::size_t c = 0; c < k; ++c) {
      simd::active().scale(1.0 / static_cast<double>(sizes[c]), r.centroids.data() + c * dim, dim);
    }
    if (!changed) break;
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.inertia += sq_dist(x, i, r.centroids.data() + static_cast<std::size_t>(r.labels[i]) * dim);
  }
  return r;
}

}  // namespace

// ------------------------------------------------------------------- graph

long UserGraph::index_of(const std::string& user_id) const {
  const auto it = index_.find(user_id);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

void UserGraph::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < nodes.size(); ++i) index_.emplace(nodes[i].user_id, i);
}

UserGraph build_user_graph(std::span<const Tweet> tweets, const std::vector<UserVector>& users,
                           const std::vector<LayoutPoint>& layout) {
  UserGraph g;
  for (const auto& u : users) {
    GraphNode node;
    node.user_id = u.user_id;
    node.vector = u.vector;
    g.nodes.push_back(std::move(node));
  }
  std::sort(g.nodes.begin(), g.nodes.end(), [](const GraphNode& a, const GraphNode& b) { return id_less(a.user_id, b.user_id); });
  g.reindex();
  for (const auto& p : layout) {
    if (const long i = g.index_of(p.user_id); i >= 0) {
      g.nodes[static_cast<std::size_t>(i)].x = p.x;
      g.nodes[static_cast<std::size_t>(i)].y = p.y;
    }
  }

  // Follower counts come from each author's most recent tweet.
  std::vector<Timestamp> seen(g.nodes.size(), Timestamp::min());
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> counts;
  for (const auto& t : tweets) {
    const long a = g.index_of(t.author_id);
    if (a >= 0) {
      auto& node = g.nodes[static_cast<std::size_t>(a)];
      ++node.tweet_count;
      if (t.created_at >= seen[static_cast<std::size_t>(a)]) {
        seen[static_cast<std::size_t>(a)] = t.created_at;
        node.followers = t.author_followers;
      }
    }
    if (t.kind == TweetKind::Original || !t.ref_author_id || *t.ref_author_id == t.author_id) continue;
    const long b = g.index_of(*t.ref_author_id);
    if (a < 0 || b < 0) {
      ++g.dropped_interactions;
      continue;
    }
    ++counts[{static_cast<std::size_t>(a), static_cast<std::size_t>(b)}];
  }
  // Scalar kernel: edge weights must not depend on the host's vector ISA.
  const auto& scalar = simd::scalar_kernels();
  for (const auto& [key, count] : counts) {
    const auto& u = g.nodes[key.first].vector;
    const auto& v = g.nodes[key.second].vector;
    const double dist = std::sqrt(scalar.squared_distance(u.data(), v.data(), u.size()));
    GraphEdge e;
    e.src = key.first;
    e.dst = key.second;
    e.interaction_count = count;
    e.epsilon_guarded = dist < kDistanceEpsilon;
    e.weight = static_cast<double>(count) / std::max(dist, kDistanceEpsilon);
    g.edges.push_back(e);
  }
  return g;
}

double SymmetricGraph::weight(std::size_t u, std::size_t v) const {
  const auto& row = adj[u];
  const auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(v, -std::numeric_limits<double>::infinity()));
  return it != row.end() && it->first == v ? it->second : 0.0;
}

SymmetricGraph symmetrize(const UserGraph& g) {
  std::vector<std::map<std::size_t, double>> acc(g.nodes.size());
  for (const auto& e : g.edges) {
    acc[e.src][e.dst] += e.weight;
    acc[e.dst][e.src] += e.weight;
  }
  SymmetricGraph s;
  s.adj.resize(g.nodes.size());
  for (std::size_t i = 0; i < acc.size(); ++i) s.adj[i].assign(acc[i].begin(), acc[i].end());
  return s;
}

// -------------------------------------------------------------- clustering

std::string_view to_string(ClusterMethod m) noexcept {
  return m == ClusterMethod::Discourse ? "discourse" : "community";
}

int Clustering::label_of(const std::string& user_id) const {
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    if (user_ids[i] == user_id) return labels[i];
  }
  return -1;
}

int Clustering::cluster_count() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, int restarts, int max_iter) {
  if (k < 1) throw InputError("k must be at least 1");
  if (k > x.rows) throw KTooLarge(k, x.rows);
  if (restarts < 1) throw InputError("restarts must be at least 1");
  std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
  detail::parallel_for(runs.size(), [&](std::size_t r) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (r + 1));
    runs[r] = kmeans_once(x, k, rng, max_iter);
  }, 1);
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  return std::move(runs[best]);
}

double silhouette(const Matrix& x, const std::vector<int>& labels) {
  const std::size_t n = x.rows;
  if (n == 0) return 0.0;
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  std::vector<double> s(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] <= 1) return;
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist(x, i, x.row(j)));
    }
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum.size(); ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    if (std::isinf(b)) return;
    const double m = std::max(a, b);
    s[i] = m > 0 ? (b - a) / m : 0.0;
  }, 16);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
}

Clustering cluster_discourse(const std::vector<UserVector>& users, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("discourse clustering needs k >= 2");
  if (k > users.size()) throw KTooLarge(k, users.size());
  std::vector<std::vector<double>> rows;
  for (const auto& u : users) rows.push_back(u.vector);
  const Matrix x = to_matrix(rows);
  const auto km = kmeans(x, k, seed);
  Clustering cl;
  cl.method = ClusterMethod::Discourse;
  for (const auto& u : users) cl.user_ids.push_back(u.user_id);
  cl.labels = canonical(km.labels);
  cl.inertia = km.inertia;
  cl.quality = silhouette(x, cl.labels);
  return cl;
}

std::vector<int> louvain(const SymmetricGraph& g) {
  const std::size_t n0 = g.adj.size();
  std::vector<int> membership(n0);
  std::iota(membership.begin(), membership.end(), 0);
  auto adj = g.adj;
  constexpr double kMinGain = 1e-12;

  while (true) {
    const std::size_t n = adj.size();
    std::vector<double> k(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& [j, w] : adj[i]) k[i] += w;
    }
    const double m2 = std::accumulate(k.begin(), k.end(), 0.0);
    if (m2 <= 0) break;

    std::vector<std::size_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> tot = k;
    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> touched;
    bool improved = false;
    for (int pass = 0; pass < 1000; ++pass) {
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ci = comm[i];
        touched.clear();
        touched.push_back(ci);
        link[ci] = 0.0;
        for (const auto& [j, w] : adj[i]) {
          if (j == i) continue;
          const std::size_t c = comm[j];
          if (link[c] == 0.0 && std::find(touched.begin(), touched.end(), c) == touched.end()) touched.push_back(c);
          link[c] += w;
        }
        tot[ci] -= k[i];
        std::size_t best = ci;
        double best_gain = link[ci] - tot[ci] * k[i] / m2;
        for (std::size_t c : touched) {
          const double gain = link[c] - tot[c] * k[i] / m2;
          if (gain > best_gain + kMinGain) {
            best_gain = gain;
            best = c;
          }
        }
        tot[best] += k[i];
        comm[i] = best;
        if (best != ci) moved = improved = true;
        for (std::size_t c : touched) link[c] = 0.0;
      }
      if (!moved) break;
    }
    if (!improved) break;

    // Aggregate communities into super-nodes.
    std::vector<int> renum(n, -1);
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (renum[comm[i]] < 0) renum[comm[i]] = count++;
    }
    std::vector<std::map<std::size_t, double>> acc(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ci = static_cast<std::size_t>(renum[comm[i]]);
      for (const auto& [j, w] : adj[i]) acc[ci][static_cast<std::size_t>(renum[comm[j]])] += w;
    }
    for (auto& m : membership) m = renum[comm[static_cast<std::size_t>(m)]];
    adj.assign(static_cast<std::size_t>(count), {});
    for (std::size_t c = 0; c < acc.size(); ++c) adj[c].assign(acc[c].begin(), acc[c].end());
  }
  return canonical(membership);
}

double modularity(const SymmetricGraph& g, const std::vector<int>& labels) {
  const std::size_t n = g.adj.size();
  if (n == 0) return 0.0;
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> in(static_cast<std::size_t>(k), 0.0), tot(static_cast<std::size_t>(k), 0.0);
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : g.adj[i]) {
      m2 += w;
      tot[static_cast<std::size_t>(labels[i])] += w;
      if (labels[i] == labels[j]) in[static_cast<std::size_t>(labels[i])] += w;
    }
  }
  if (m2 <= 0) return 0.0;
  double q = 0.0;
  for (std::size_t c = 0; c < in.size(); ++c) q += in[c] / m2 - (tot[c] / m2) * (tot[c] / m2);
  return q;
}

Clustering cluster_community(const UserGraph& g) {
  const auto s = symmetrize(g);
  Clustering cl;
  cl.method = ClusterMethod::Community;
  for (const auto& node : g.nodes) cl.user_ids.push_back(node.user_id);
  cl.labels = louvain(s);
  cl.quality = modularity(s, cl.labels);
  return cl;
}

// ------------------------------------------------------------- influencers

std::unordered_map<std::string, UserAnnotationSummary> summarize_user_annotations(
    std::span<const Tweet> tweets, std::span<const Annotation> annotations) {
  std::unordered_map<std::string, const Tweet*> by_id;
  for (const auto& t : tweets) by_id.emplace(t.id, &t);
  std::unordered_map<std::string, UserAnnotationSummary> out;
  for (const auto& a : annotations) {
    const auto it = by_id.find(a.tweet_id);
    if (it == by_id.end()) continue;
    auto& s = out[it->second->author_id];
    ++s.tweets;
    s.compound_sum += a.sentiment.compound;
    for (const auto& l : a.topics.assigned) ++s.labels[l];
  }
  return out;
}

Centrality centralities(const SymmetricGraph& g) {
  const std::size_t n = g.adj.size();
  Centrality c;
  c.weighted_degree.assign(n, 0.0);
  c.degree.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : g.adj[i]) {
      c.weighted_degree[i] += w;
      if (j != i) ++c.degree[i];
    }
  }
  if (n == 0) return c;
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
  for (int it = 0; it < 100; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = x[i];
      for (const auto& [j, w] : g.adj[i]) next[i] += w * x[j];
    }
    const double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
    for (auto& v : next) v /= norm;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff += std::abs(next[i] - x[i]);
    x.swap(next);
    if (diff < static_cast<double>(n) * 1e-8) break;
  }
  c.eigenvector = std::move(x);
  return c;
}

InfluencerReport rank_influencers(const UserGraph& g, const Clustering& cl,
                                  const std::unordered_map<std::string, UserAnnotationSummary>& summaries,
                                  std::size_t top_k) {
  std::unordered_map<std::string, int> label_of;
  for (std::size_t i = 0; i < cl.user_ids.size(); ++i) label_of.emplace(cl.user_ids[i], cl.labels[i]);
  const auto cent = centralities(symmetrize(g));

  InfluencerReport report;
  report.method = cl.method;
  const int k = cl.cluster_count();
  std::vector<std::vector<InfluencerEntry>> members(static_cast<std::size_t>(std::max(k, 0)));
  report.clusters.resize(members.size());
  std::vector<std::size_t> tweets(members.size(), 0);
  std::vector<double> sums(members.size(), 0.0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& node = g.nodes[i];
    const auto it = label_of.find(node.user_id);
    if (it == label_of.end()) throw InputError("clustering does not cover user " + node.user_id);
    const auto c = static_cast<std::size_t>(it->second);
    InfluencerEntry e;
    e.user_id = node.user_id;
    e.weighted_degree = cent.weighted_degree[i];
    e.degree = cent.degree[i];
    e.eigenvector = cent.eigenvector[i];
    e.followers = node.followers;
    if (const auto s = summaries.find(node.user_id); s != summaries.end()) {
      e.mean_sentiment = s->second.mean_compound();
      e.labels = s->second.labels;
      tweets[c] += s->second.tweets;
      sums[c] += s->second.compound_sum;
      for (const auto& [label, n] : s->second.labels) report.clusters[c].labels[label] += n;
    }
    members[c].push_back(std::move(e));
  }
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& entries = members[c];
    std::sort(entries.begin(), entries.end(), [](const InfluencerEntry& a, const InfluencerEntry& b) {
      if (a.weighted_degree != b.weighted_degree) return a.weighted_degree > b.weighted_degree;
      if (a.followers != b.followers) return a.followers > b.followers;
      return id_less(a.user_id, b.user_id);
    });
    auto& out = report.clusters[c];
    out.cluster = static_cast<int>(c);
    out.size = entries.size();
    out.mean_sentiment = tweets[c] == 0 ? 0.0 : sums[c] / static_cast<double>(tweets[c]);
    if (entries.size() > top_k) entries.resize(top_k);
    out.ranked = std::move(entries);
  }
  return report;
}

nlohmann::json influencers_to_json(const InfluencerReport& r) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : r.clusters) {
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& e : c.ranked) {
      ranked.push_back({{"user_id", e.user_id},
                        {"weighted_degree", e.weighted_degree},
                        {"degree", e.degree},
                        {"eigenvector", e.eigenvector},
                        {"followers", e.followers},
                        {"mean_sentiment", e.mean_sentiment},
                        {"labels", e.labels}});
    }
    clusters.push_back({{"cluster", c.cluster},
                        {"size", c.size},
                        {"mean_sentiment", c.mean_sentiment},
                        {"labels", c.labels},
                        {"influencers", ranked}});
  }
  return {{"method", std::string(to_string(r.method))}, {"clusters", clusters}};
}

void write_edges_csv(std::ostream& out, const UserGraph& g) {
  out << "src,dst,interaction_count,weight\n";
  for (const auto& e : g.edges) {
    out << g.nodes[e.src].user_id << ',' << g.nodes[e.dst].user_id << ',' << e.interaction_count << ','
        << fmt(e.weight) << '\n';
  }
}

void write_nodes_csv(std::ostream& out, const UserGraph& g, const Clustering& discourse, const Clustering& community,
                     const std::unordered_map<std::string, UserAnnotationSummary>& summaries) {
  const auto cent = centralities(symmetrize(g));
  std::unordered_map<std::string, int> d, c;
  for (std::size_t i = 0; i < discourse.user_ids.size(); ++i) d.emplace(discourse.user_ids[i], discourse.labels[i]);
  for (std::size_t i = 0; i < community.user_ids.size(); ++i) c.emplace(community.user_ids[i], community.labels[i]);
  out << "user_id,x,y,followers,tweet_count,cluster_discourse,cluster_community,weighted_degree,degree,eigenvector,"
         "mean_sentiment\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    const auto di = d.find(n.user_id);
    const auto ci = c.find(n.user_id);
    const auto s = summaries.find(n.user_id);
    out << n.user_id << ',' << fmt(n.x) << ',' << fmt(n.y) << ',' << n.followers << ',' << n.tweet_count << ','
        << (di == d.end() ? -1 : di->second) << ',' << (ci == c.end() ? -1 : ci->second) << ','
        << fmt(cent.weighted_degree[i]) << ',' << cent.degree[i] << ',' << fmt(cent.eigenvector[i]) << ','
        << fmt(s == summaries.end() ? 0.0 : s->second.mean_compound()) << '\n';
  }
}

}  // namespace tweetlens
