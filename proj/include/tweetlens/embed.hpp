#pragma once
// Paragraph vectors, distributed bag of words: each document vector is trained
// to predict the words it contains, with negative sampling.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tweetlens/corpus.hpp"

namespace tweetlens {

struct EmbeddingConfig {
  int dim = 200;
  int epochs = 50;
  int min_word_freq = 3;  // words seen fewer times reject their documents
  int window = 5;         // recorded in the artifact; DBOW has no context window
  int negative_samples = 5;
  double initial_lr = 0.025;
  double final_lr = 0.0001;
  std::uint64_t seed = 1;
  int workers = 1;  // 1 = deterministic; more = lock-free parallel updates
  int infer_epochs = 50;
};

// Throws InputError on out-of-range fields.
void validate(const EmbeddingConfig& cfg);

struct TrainingDoc {
  std::string id;
  std::vector<std::string> tokens;
};

struct TrainingSet {
  std::vector<TrainingDoc> docs;
  std::unordered_map<std::string, std::uint64_t> frequencies;  // over every candidate
  std::size_t rejected_rare = 0;
  std::size_t rejected_empty = 0;
};

// One candidate per unique LIGHT text, first occurrence wins.
std::vector<TrainingDoc> training_candidates(std::span<const ProcessedTweet> tweets);

// Throws EmptyTrainingSet when nothing survives.
TrainingSet build_training_set(std::vector<TrainingDoc> candidates, const EmbeddingConfig& cfg);

struct InferredVector {
  std::vector<double> vector;
  bool all_oov = false;  // zero vector returned
  bool stored = false;   // exact match of a training document
};

class EmbeddingModel {
 public:
  EmbeddingConfig config;

  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::vector<double> word_weights;  // words.size() x dim, output layer

  std::vector<std::string> doc_ids;
  std::vector<double> doc_weights;  // doc_ids.size() x dim
  std::vector<std::string> doc_texts;  // space-joined training tokens

  std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch

  int dim() const noexcept { return config.dim; }
  std::size_t vocab_size() const noexcept { return words.size(); }
  std::size_t doc_count() const noexcept { return doc_ids.size(); }

  std::span<const double> doc_vector(std::size_t i) const {
    return {doc_weights.data() + i * config.dim, static_cast<std::size_t>(config.dim)};
  }
  std::span<const double> word_vector(std::size_t i) const {
    return {word_weights.data() + i * config.dim, static_cast<std::size_t>(config.dim)};
  }

  // -1 when absent.
  long word_index(const std::string& w) const;
  long doc_index(const std::string& id) const;
  // Training document whose token stream equals `tokens`, or -1.
  long doc_by_tokens(std::span<const std::string> tokens) const;

  // Rebuilds the lookup tables after the public vectors were filled in.
  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> word_index_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::unordered_map<std::string, std::size_t> text_index_;
};

// Throws EmptyTrainingSet for an empty set and NonFiniteLoss on divergence.
EmbeddingModel train(const TrainingSet& set, const EmbeddingConfig& cfg);

// Stored vector for training texts; otherwise gradient inference against the
// frozen output layer. Deterministic for a given model and token list.
InferredVector infer_vector(const EmbeddingModel& m, std::span<const std::string> tokens);

struct UserVector {
  std::string user_id;
  std::vector<double> vector;
  std::size_t n_docs = 0;
};

// Arithmetic mean per author. `vectors[i]` belongs to `authors[i]`. Output
// ordered by user id.
std::vector<UserVector> pool_user_vectors(std::span<const std::string> authors,
                                          std::span<const std::vector<double>> vectors);

// Retweets resolve to their source tweet when it is present. Tweets with no
// in-vocabulary token are left out; users left with nothing are skipped.
std::vector<UserVector> user_vectors(const EmbeddingModel& m, std::span<const ProcessedTweet> tweets);

void save_model(const EmbeddingModel& m, const std::filesystem::path& path);
EmbeddingModel load_model(const std::filesystem::path& path);

// id,v0,...,v{dim-1}
void write_vectors_csv(std::ostream& out, const std::vector<std::string>& ids, std::span<const double> flat, int dim);
void write_doc_vectors_csv(std::ostream& out, const EmbeddingModel& m);
void write_user_vectors_csv(std::ostream& out, const std::vector<UserVector>& users);
std::vector<UserVector> read_user_vectors_csv(std::istream& in);

}  // namespace tweetlens
