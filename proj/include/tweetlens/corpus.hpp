#pragma once
// Tweet records, JSON Lines ingestion, window/term filtering, duplicate
// collapsing and the translation hook.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tweetlens {

using Timestamp = std::chrono::sys_seconds;

enum class TweetKind { Original, Retweet, Reply };

std::string_view to_string(TweetKind kind) noexcept;

struct Tweet {
  std::string id;
  std::string text;
  std::string lang;
  Timestamp created_at{};
  std::string author_id;
  std::uint64_t author_followers = 0;
  std::optional<std::string> author_location;
  TweetKind kind = TweetKind::Original;
  std::optional<std::string> ref_tweet_id;
  std::optional<std::string> ref_author_id;

  bool operator==(const Tweet&) const = default;
};

// Closed interval [start, end].
struct TimeWindow {
  Timestamp start;
  Timestamp end;

  bool contains(Timestamp t) const noexcept { return start <= t && t <= end; }
};

TimeWindow make_window(Timestamp start, Timestamp end);

struct Corpus {
  std::vector<Tweet> tweets;
  std::optional<TimeWindow> window;
  std::vector<std::string> exclusion_terms;
};

// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS[.fff](Z|+00:00)`.
Timestamp parse_timestamp(std::string_view s);
std::string format_timestamp(Timestamp t);
// A bare date used as a window end covers that whole day.
Timestamp parse_window_end(std::string_view s);

Tweet tweet_from_json(const nlohmann::json& obj, std::size_t line_no);
nlohmann::json tweet_to_json(const Tweet& t);

Corpus load_jsonl(const std::filesystem::path& path);
Corpus read_jsonl(std::istream& in);
void write_jsonl(std::ostream& out, const Corpus& corpus);

Corpus filter_corpus(const Corpus& corpus, TimeWindow window, const std::vector<std::string>& exclusion_terms);

// Keeps the first tweet per LIGHT-cleaned text.
Corpus dedupe_unique_texts(const Corpus& corpus);

class TranslatorBackend {
 public:
  virtual ~TranslatorBackend() = default;
  virtual std::string name() const = 0;
  // Throws BackendUnavailable when the service cannot be reached.
  virtual std::string translate(std::string_view text, std::string_view source_lang) = 0;
};

class IdentityTranslator final : public TranslatorBackend {
 public:
  std::string name() const override { return "identity"; }
  std::string translate(std::string_view text, std::string_view) override { return std::string(text); }
};

// English tweets pass through untouched and never reach the backend.
Tweet translate(const Tweet& tweet, TranslatorBackend& backend);

// A tweet plus its normalized forms, as written by the preprocess stage.
struct ProcessedTweet {
  Tweet tweet;
  std::string clean_full;
  std::string clean_light;
  std::vector<std::string> tokens;  // tokenize(clean_full)
};

struct PreprocessOptions {
  bool skip_translation_errors = false;
};

std::vector<ProcessedTweet> preprocess(const Corpus& corpus, TranslatorBackend& translator,
                                       const PreprocessOptions& options = {});

nlohmann::json processed_to_json(const ProcessedTweet& p);
ProcessedTweet processed_from_json(const nlohmann::json& obj, std::size_t line_no);
void write_processed_jsonl(std::ostream& out, const std::vector<ProcessedTweet>& tweets);
std::vector<ProcessedTweet> read_processed_jsonl(std::istream& in);

}  // namespace tweetlens

namespace tweetlens {

// Orders numeric id strings numerically (shorter first, then lexicographic).
inline bool id_less(std::string_view a, std::string_view b) noexcept {
  return a.size() != b.size() ? a.size() < b.size() : a < b;
}

}  // namespace tweetlens
