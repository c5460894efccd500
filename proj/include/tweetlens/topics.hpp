#pragma once
// Zero-shot multi-label topic assignment: a pluggable scoring backend plus
// a confidence threshold.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tweetlens {

using LabelSet = std::vector<std::string>;
using LabelScores = std::map<std::string, double>;

// The 25 crisis-impact labels, in their canonical order.
const LabelSet& default_labels();

inline constexpr double kDefaultAlpha = 0.7;

struct TopicAssignment {
  LabelScores scores;
  std::vector<std::string> assigned;  // label-set order
  double alpha = kDefaultAlpha;
};

struct BackendInfo {
  std::string name;
  std::string version;
};

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual BackendInfo info() = 0;
  // One score map per sequence, each holding every label.
  virtual std::vector<LabelScores> classify_batch(std::span<const std::string> sequences, const LabelSet& labels) = 0;
  // Largest batch the backend accepts in one call.
  virtual std::size_t max_batch() const { return 64; }

  LabelScores classify(const std::string& sequence, const LabelSet& labels);
};

// score(label) = h / (h + 1), h = keyword hits in the FULL-normalized token stream.
class KeywordBackend final : public ClassifierBackend {
 public:
  explicit KeywordBackend(const std::map<std::string, std::vector<std::string>>& lexicon);

  static KeywordBackend builtin();
  static KeywordBackend from_json_file(const std::filesystem::path& path);

  BackendInfo info() override { return {"keyword", version_}; }
  std::vector<LabelScores> classify_batch(std::span<const std::string> sequences, const LabelSet& labels) override;
  std::size_t max_batch() const override { return 1024; }

  double score(const std::vector<std::string>& tokens, const std::string& label) const;

 private:
  std::map<std::string, std::vector<std::string>> keywords_;  // normalized
  std::string version_;
};

inline KeywordBackend keyword_fallback_backend(const std::map<std::string, std::vector<std::string>>& lexicon) {
  return KeywordBackend(lexicon);
}

// Client for the NLI inference service (POST /classify_batch, GET /healthz).
class RemoteBackend final : public ClassifierBackend {
 public:
  struct Options {
    std::size_t max_batch = 64;
    int timeout_seconds = 120;
  };

  explicit RemoteBackend(std::string base_url);
  RemoteBackend(std::string base_url, Options options);

  BackendInfo info() override;
  std::vector<LabelScores> classify_batch(std::span<const std::string> sequences, const LabelSet& labels) override;
  std::size_t max_batch() const override { return options_.max_batch; }

 private:
  std::string base_url_;
  Options options_;
  std::mutex mutex_;
  std::optional<BackendInfo> info_;
};

// Validates score ranges and applies score >= alpha.
TopicAssignment threshold_scores(const LabelScores& scores, const LabelSet& labels, double alpha);

TopicAssignment assign_topics(const std::string& text_light, const LabelSet& labels, double alpha,
                              ClassifierBackend& backend);

struct AssignOptions {
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
};

// Results are positionally aligned with `texts`; at most `max_in_flight`
// batches are outstanding at once.
std::vector<TopicAssignment> assign_topics_batch(std::span<const std::string> texts, const LabelSet& labels,
                                                 double alpha, ClassifierBackend& backend,
                                                 const AssignOptions& options = {});

// `keyword`, `keyword:<lexicon.json>` or `remote:<url>`; a bare `remote`
// reads the URL from TWEETLENS_NLI_URL.
std::unique_ptr<ClassifierBackend> make_backend(const std::string& spec);

}  // namespace tweetlens
