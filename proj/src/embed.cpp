#include "tweetlens/embed.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "tweetlens/errors.hpp"
#include "tweetlens/hash.hpp"
#include "tweetlens/simd.hpp"

namespace tweetlens {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string join_tokens(std::span<const std::string> tokens) {
  std::string key;
  for (const auto& t : tokens) {
    if (!key.empty()) key += ' ';
    key += t;
  }
  return key;
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative count^0.75 table, sampled by binary search.
class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<std::uint64_t>& counts) : cdf_(counts.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      acc += std::pow(static_cast<double>(counts[i]), 0.75);
      cdf_[i] = acc;
    }
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t draw(std::mt19937_64& rng) const {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

// One document's pass over its words. `work` and `neu1e` are dim-sized
// scratch. Returns the summed loss. When `frozen` the output layer is read only.
// `shared` switches output-layer access to relaxed atomics for concurrent workers.
double train_document(double* doc, std::span<const std::size_t> words, double* output, std::size_t dim,
                      int negative, double lr, const NegativeSampler& sampler, std::mt19937_64& rng,
                      bool frozen, bool shared, double* work, double* neu1e) {
  const auto& k = simd::active();
  double loss = 0.0;
  for (std::size_t w : words) {
    std::fill(neu1e, neu1e + dim, 0.0);
    for (int j = 0; j <= negative; ++j) {
      std::size_t target = w;
      if (j > 0) {
        target = sampler.draw(rng);
        if (target == w) continue;
      }
      const double label = j == 0 ? 1.0 : 0.0;
      double* row = output + target * dim;
      const double* u = row;
      if (shared) {
        for (std::size_t c = 0; c < dim; ++c) work[c] = std::atomic_ref<double>(row[c]).load(std::memory_order_relaxed);
        u = work;
      }
      const double f = k.dot(doc, u, dim);
      loss += label > 0 ? softplus(-f) : softplus(f);
      const double g = (label - sigmoid(f)) * lr;
      k.axpy(g, u, neu1e, dim);
      if (frozen) continue;
      if (shared) {
        for (std::size_t c = 0; c < dim; ++c) {
          std::atomic_ref<double>(row[c]).store(work[c] + g * doc[c], std::memory_order_relaxed);
        }
      } else {
        k.axpy(g, doc, row, dim);
      }
    }
    k.axpy(1.0, neu1e, doc, dim);
  }
  return loss;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void validate(const EmbeddingConfig& cfg) {
  if (cfg.dim <= 0) throw InputError("embedding dim must be positive");
  if (cfg.epochs <= 0) throw InputError("epochs must be positive");
  if (cfg.min_word_freq < 1) throw InputError("min_word_freq must be at least 1");
  if (cfg.negative_samples < 0) throw InputError("negative_samples must be non-negative");
  if (!(cfg.initial_lr > cfg.final_lr && cfg.final_lr > 0)) {
    throw InputError("learning rates must satisfy initial_lr > final_lr > 0");
  }
  if (cfg.workers < 1) throw InputError("workers must be at least 1");
  if (cfg.infer_epochs < 1) throw InputError("infer_epochs must be at least 1");
}

std::vector<TrainingDoc> training_candidates(std::span<const ProcessedTweet> tweets) {
  std::vector<TrainingDoc> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : tweets) {
    if (!seen.insert(p.clean_light).second) continue;
    out.push_back({p.tweet.id, p.tokens});
  }
  return out;
}

TrainingSet build_training_set(std::vector<TrainingDoc> candidates, const EmbeddingConfig& cfg) {
  validate(cfg);
  TrainingSet set;
  for (const auto& d : candidates) {
    for (const auto& t : d.tokens) ++set.frequencies[t];
  }
  const auto min_freq = static_cast<std::uint64_t>(cfg.min_word_freq);
  for (auto& d : candidates) {
    if (d.tokens.empty()) {
      ++set.rejected_empty;
      continue;
    }
    const bool rare = std::any_of(d.tokens.begin(), d.tokens.end(),
                                  [&](const std::string& t) { return set.frequencies.at(t) < min_freq; });
    if (rare) {
      ++set.rejected_rare;
      continue;
    }
    set.docs.push_back(std::move(d));
  }
  if (set.docs.empty()) throw EmptyTrainingSet();
  return set;
}

long EmbeddingModel::word_index(const std::string& w) const {
  const auto it = word_index_.find(w);
  return it == word_index_.end() ? -1 : static_cast<long>(it->second);
}

long EmbeddingModel::doc_index(const std::string& id) const {
  const auto it = doc_index_.find(id);
  return it == doc_index_.end() ? -1 : static_cast<long>(it->second);
}

long EmbeddingModel::doc_by_tokens(std::span<const std::string> tokens) const {
  const auto it = text_index_.find(join_tokens(tokens));
  return it == text_index_.end() ? -1 : static_cast<long>(it->second);
}

void EmbeddingModel::reindex() {
  word_index_.clear();
  doc_index_.clear();
  text_index_.clear();
  for (std::size_t i = 0; i < words.size(); ++i) word_index_.emplace(words[i], i);
  for (std::size_t i = 0; i < doc_ids.size(); ++i) doc_index_.emplace(doc_ids[i], i);
  for (std::size_t i = 0; i < doc_texts.size(); ++i) text_index_.emplace(doc_texts[i], i);
}

EmbeddingModel train(const TrainingSet& set, const EmbeddingConfig& cfg) {
  validate(cfg);
  if (set.docs.empty()) throw EmptyTrainingSet();
  const auto dim = static_cast<std::size_t>(cfg.dim);

  EmbeddingModel m;
  m.config = cfg;

  // Vocabulary in first-seen order over the training documents.
  std::unordered_map<std::string, std::size_t> vocab;
  std::vector<std::vector<std::size_t>> doc_words(set.docs.size());
  for (std::size_t d = 0; d < set.docs.size(); ++d) {
    for (const auto& t : set.docs[d].tokens) {
      auto [it, fresh] = vocab.emplace(t, m.words.size());
      if (fresh) {
        m.words.push_back(t);
        const auto f = set.frequencies.find(t);
        m.counts.push_back(f == set.frequencies.end() ? 1 : f->second);
      }
      doc_words[d].push_back(it->second);
    }
    m.doc_ids.push_back(set.docs[d].id);
    m.doc_texts.push_back(join_tokens(set.docs[d].tokens));
  }
  m.reindex();

  std::mt19937_64 rng(cfg.seed);
  m.word_weights.assign(m.words.size() * dim, 0.0);
  m.doc_weights.resize(set.docs.size() * dim);
  for (auto& x : m.doc_weights) x = (uniform01(rng) - 0.5) / static_cast<double>(dim);

  const NegativeSampler sampler(m.counts);
  std::size_t pairs_per_epoch = 0;
  for (const auto& w : doc_words) pairs_per_epoch += w.size();
  const double total = static_cast<double>(cfg.epochs) * static_cast<double>(set.docs.size());
  auto lr_at = [&](double progress) { return cfg.initial_lr - (cfg.initial_lr - cfg.final_lr) * progress / total; };

  std::vector<std::size_t> order(set.docs.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t workers = std::min<std::size_t>(cfg.workers, set.docs.size());
  std::vector<std::mt19937_64> worker_rngs;
  for (std::size_t w = 0; w < workers; ++w) worker_rngs.emplace_back(cfg.seed + 0x9E3779B97F4A7C15ULL * (w + 1));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    const double base = static_cast<double>(epoch) * static_cast<double>(set.docs.size());
    if (workers == 1) {
      std::vector<double> work(dim), neu1e(dim);
      for (std::size_t i = 0; i < order.size(); ++i) {
        const auto d = order[i];
        epoch_loss += train_document(m.doc_weights.data() + d * dim, doc_words[d], m.word_weights.data(), dim,
                                     cfg.negative_samples, lr_at(base + static_cast<double>(i)), sampler,
                                     worker_rngs[0], false, false, work.data(), neu1e.data());
      }
    } else {
      std::vector<double> losses(workers, 0.0);
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          std::vector<double> work(dim), neu1e(dim);
          for (std::size_t i; (i = next.fetch_add(1)) < order.size();) {
            const auto d = order[i];
            losses[w] += train_document(m.doc_weights.data() + d * dim, doc_words[d], m.word_weights.data(), dim,
                                        cfg.negative_samples, lr_at(base + static_cast<double>(i)), sampler,
                                        worker_rngs[w], false, true, work.data(), neu1e.data());
          }
        });
      }
      for (auto& t : pool) t.join();
      epoch_loss = std::accumulate(losses.begin(), losses.end(), 0.0);
    }
    epoch_loss /= static_cast<double>(std::max<std::size_t>(pairs_per_epoch, 1));
    if (!std::isfinite(epoch_loss) || !all_finite(m.doc_weights)) throw NonFiniteLoss(epoch + 1);
    m.epoch_loss.push_back(epoch_loss);
  }
  return m;
}

InferredVector infer_vector(const EmbeddingModel& m, std::span<const std::string> tokens) {
  const auto dim = static_cast<std::size_t>(m.dim());
  InferredVector out;
  if (const long d = m.doc_by_tokens(tokens); d >= 0) {
    const auto v = m.doc_vector(static_cast<std::size_t>(d));
    out.vector.assign(v.begin(), v.end());
    out.stored = true;
    return out;
  }
  std::vector<std::size_t> words;
  for (const auto& t : tokens) {
    if (const long w = m.word_index(t); w >= 0) words.push_back(static_cast<std::size_t>(w));
  }
  if (words.empty()) {
    out.vector.assign(dim, 0.0);
    out.all_oov = true;
    return out;
  }
  // Seed from the text so repeated calls agree.
  const std::string digest = sha256_hex(join_tokens(tokens));
  std::mt19937_64 rng(m.config.seed ^ std::stoull(digest.substr(0, 16), nullptr, 16));
  out.vector.resize(dim);
  for (auto& x : out.vector) x = (uniform01(rng) - 0.5) / static_cast<double>(dim);

  const NegativeSampler sampler(m.counts);
  std::vector<double> work(dim), neu1e(dim);
  const auto& cfg = m.config;
  // The output layer is only read; cast away const for the shared signature.
  auto* output = const_cast<double*>(m.word_weights.data());
  for (int e = 0; e < cfg.infer_epochs; ++e) {
    const double lr = cfg.initial_lr - (cfg.initial_lr - cfg.final_lr) * e / cfg.infer_epochs;
    train_document(out.vector.data(), words, output, dim, cfg.negative_samples, lr, sampler, rng, true, false,
                   work.data(), neu1e.data());
  }
  return out;
}

std::vector<UserVector> pool_user_vectors(std::span<const std::string> authors,
                                          std::span<const std::vector<double>> vectors) {
  if (authors.size() != vectors.size()) throw InputError("pool_user_vectors: authors and vectors differ in length");
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<UserVector> users;
  for (std::size_t i = 0; i < authors.size(); ++i) {
    auto [it, fresh] = slot.emplace(authors[i], users.size());
    if (fresh) users.push_back({authors[i], std::vector<double>(vectors[i].size(), 0.0), 0});
    auto& u = users[it->second];
    if (u.vector.size() != vectors[i].size()) throw InputError("pool_user_vectors: vector dimensions differ");
    for (std::size_t c = 0; c < u.vector.size(); ++c) u.vector[c] += vectors[i][c];
    ++u.n_docs;
  }
  for (auto& u : users) {
    for (auto& x : u.vector) x /= static_cast<double>(u.n_docs);
  }
  std::sort(users.begin(), users.end(), [](const UserVector& a, const UserVector& b) { return id_less(a.user_id, b.user_id); });
  return users;
}

std::vector<UserVector> user_vectors(const EmbeddingModel& m, std::span<const ProcessedTweet> tweets) {
  std::unordered_map<std::string, const ProcessedTweet*> by_id;
  for (const auto& p : tweets) by_id.emplace(p.tweet.id, &p);

  std::unordered_map<std::string, InferredVector> cache;
  std::vector<std::string> authors;
  std::vector<std::vector<double>> vectors;
  for (const auto& p : tweets) {
    const ProcessedTweet* source = &p;
    if (p.tweet.kind == TweetKind::Retweet && p.tweet.ref_tweet_id) {
      if (const auto it = by_id.find(*p.tweet.ref_tweet_id); it != by_id.end()) source = it->second;
    }
    const std::string key = join_tokens(source->tokens);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, infer_vector(m, source->tokens)).first;
    if (it->second.all_oov) continue;
    authors.push_back(p.tweet.author_id);
    vectors.push_back(it->second.vector);
  }
  return pool_user_vectors(authors, vectors);
}

// ----------------------------------------------------------------- artifacts

namespace {

constexpr char kMagic[8] = {'T', 'L', 'P', 'V', 'D', 'B', 'W', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw InputError("embedding model file is truncated");
  return v;
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1u << 20)) throw InputError("embedding model file is corrupt");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) throw InputError("embedding model file is truncated");
  return s;
}

std::vector<double> get_doubles(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw InputError("embedding model file is truncated");
  }
  return v;
}

void append_double(std::string& line, double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  line.append(buf, r.ptr);
}

}  // namespace

void save_model(const EmbeddingModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  const auto& c = m.config;
  put<std::int32_t>(out, c.dim);
  put<std::int32_t>(out, c.epochs);
  put<std::int32_t>(out, c.min_word_freq);
  put<std::int32_t>(out, c.window);
  put<std::int32_t>(out, c.negative_samples);
  put<std::int32_t>(out, c.workers);
  put<std::int32_t>(out, c.infer_epochs);
  put<double>(out, c.initial_lr);
  put<double>(out, c.final_lr);
  put<std::uint64_t>(out, c.seed);
  put<std::uint64_t>(out, m.words.size());
  put<std::uint64_t>(out, m.doc_ids.size());
  put<std::uint64_t>(out, m.epoch_loss.size());
  for (std::size_t i = 0; i < m.words.size(); ++i) {
    put_string(out, m.words[i]);
    put<std::uint64_t>(out, m.counts[i]);
  }
  put_doubles(out, m.word_weights);
  for (const auto& id : m.doc_ids) put_string(out, id);
  put_doubles(out, m.doc_weights);
  put_doubles(out, m.epoch_loss);
  for (const auto& t : m.doc_texts) put_string(out, t);
  if (!out) throw InputError("failed writing " + path.string());
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw InputError(path.string() + " is not an embedding model");
  }
  EmbeddingModel m;
  auto& c = m.config;
  c.dim = get<std::int32_t>(in);
  c.epochs = get<std::int32_t>(in);
  c.min_word_freq = get<std::int32_t>(in);
  c.window = get<std::int32_t>(in);
  c.negative_samples = get<std::int32_t>(in);
  c.workers = get<std::int32_t>(in);
  c.infer_epochs = get<std::int32_t>(in);
  c.initial_lr = get<double>(in);
  c.final_lr = get<double>(in);
  c.seed = get<std::uint64_t>(in);
  validate(c);
  const auto nv = get<std::uint64_t>(in);
  const auto nd = get<std::uint64_t>(in);
  const auto ne = get<std::uint64_t>(in);
  const auto dim = static_cast<std::size_t>(c.dim);
  for (std::uint64_t i = 0; i < nv; ++i) {
    m.words.push_back(get_string(in));
    m.counts.push_back(get<std::uint64_t>(in));
  }
  m.word_weights = get_doubles(in, nv * dim);
  for (std::uint64_t i = 0; i < nd; ++i) m.doc_ids.push_back(get_string(in));
  m.doc_weights = get_doubles(in, nd * dim);
  m.epoch_loss = get_doubles(in, ne);
  for (std::uint64_t i = 0; i < nd; ++i) m.doc_texts.push_back(get_string(in));
  m.reindex();
  return m;
}

void write_vectors_csv(std::ostream& out, const std::vector<std::string>& ids, std::span<const double> flat, int dim) {
  std::string line = "id";
  for (int c = 0; c < dim; ++c) line += ",v" + std::to_string(c);
  out << line << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    line = ids[i];
    for (int c = 0; c < dim; ++c) {
      line += ',';
      append_double(line, flat[i * dim + c]);
    }
    out << line << '\n';
  }
}

void write_doc_vectors_csv(std::ostream& out, const EmbeddingModel& m) {
  write_vectors_csv(out, m.doc_ids, m.doc_weights, m.dim());
}

void write_user_vectors_csv(std::ostream& out, const std::vector<UserVector>& users) {
  const std::size_t dim = users.empty() ? 0 : users.front().vector.size();
  std::string line = "user_id,n_docs";
  for (std::size_t c = 0; c < dim; ++c) line += ",v" + std::to_string(c);
  out << line << '\n';
  for (const auto& u : users) {
    line = u.user_id + "," + std::to_string(u.n_docs);
    for (double x : u.vector) {
      line += ',';
      append_double(line, x);
    }
    out << line << '\n';
  }
}

std::vector<UserVector> read_user_vectors_csv(std::istream& in) {
  std::vector<UserVector> users;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (++line_no == 1) continue;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      fields.push_back(rest.substr(0, pos));
    }
    fields.push_back(rest);
    if (fields.size() < 2) throw MalformedLine(line_no, "expected user_id,n_docs,vector...");
    UserVector u;
    u.user_id = std::string(fields[0]);
    auto parse = [&](std::string_view f, auto& v) {
      const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
      if (r.ec != std::errc{} || r.ptr != f.data() + f.size()) throw MalformedLine(line_no, "bad number");
    };
    parse(fields[1], u.n_docs);
    u.vector.resize(fields.size() - 2);
    for (std::size_t c = 2; c < fields.size(); ++c) parse(fields[c], u.vector[c - 2]);
    users.push_back(std::move(u));
  }
  return users;
}

}  // namespace tweetlens
