#include "tweetlens/topics.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <set>

#include <json.hpp>

#include "tweetlens/errors.hpp"
#include "tweetlens/hash.hpp"
#include "tweetlens/resources.hpp"
#include "tweetlens/text.hpp"

namespace tweetlens {

using nlohmann::json;

const LabelSet& default_labels() {
  static const LabelSet labels = {
      "sympathy",     "criticism",        "hope",          "job",          "relief measures",
      "compensation", "evacuation",       "ecosystem",     "government",   "corruption",
      "news updates", "volunteers",       "donation",      "cellular network", "housing",
      "farm",         "utilities",        "water supply",  "power supply", "food supply",
      "medical assistance", "coronavirus", "petition",     "poverty",      "assistance required"};
  return labels;
}

LabelScores ClassifierBackend::classify(const std::string& sequence, const LabelSet& labels) {
  auto result = classify_batch(std::span<const std::string>(&sequence, 1), labels);
  if (result.size() != 1) throw BackendContractViolation("expected one result for one sequence");
  return std::move(result.front());
}

// ---------------------------------------------------------------- keyword

namespace {

std::map<std::string, std::vector<std::string>> parse_lexicon(const json& j) {
  if (!j.is_object()) throw InputError("keyword lexicon must be a JSON object of label -> [keywords]");
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [label, words] : j.items()) {
    if (!words.is_array()) throw InputError("keywords for \"" + label + "\" must be an array");
    out[label] = words.get<std::vector<std::string>>();
  }
  return out;
}

}  // namespace

KeywordBackend::KeywordBackend(const std::map<std::string, std::vector<std::string>>& lexicon) {
  std::string fingerprint;
  for (const auto& [label, words] : lexicon) {
    std::set<std::string> normalized;
    for (const auto& w : words) {
      for (auto& token : tokenize(clean_text(w, CleanProfile::Full))) normalized.insert(std::move(token));
    }
    if (normalized.empty()) throw EmptyLexicon(label);
    keywords_[label].assign(normalized.begin(), normalized.end());
    fingerprint += label + ":";
    for (const auto& w : normalized) fingerprint += w + ",";
    fingerprint += ";";
  }
  version_ = sha256_hex(fingerprint).substr(0, 12);
}

KeywordBackend KeywordBackend::builtin() {
  return KeywordBackend(parse_lexicon(json::parse(resources::topic_keywords())));
}

KeywordBackend KeywordBackend::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open keyword lexicon " + path.string());
  try {
    return KeywordBackend(parse_lexicon(json::parse(in)));
  } catch (const json::exception& e) {
    throw InputError("bad keyword lexicon " + path.string() + ": " + e.what());
  }
}

double KeywordBackend::score(const std::vector<std::string>& tokens, const std::string& label) const {
  auto it = keywords_.find(label);
  if (it == keywords_.end()) throw EmptyLexicon(label);
  const auto& words = it->second;
  std::size_t hits = 0;
  for (const auto& t : tokens) hits += std::binary_search(words.begin(), words.end(), t) ? 1 : 0;
  const auto h = static_cast<double>(hits);
  return h / (h + 1.0);
}

std::vector<LabelScores> KeywordBackend::classify_batch(std::span<const std::string> sequences, const LabelSet& labels) {
  std::vector<LabelScores> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    const auto tokens = tokenize(clean_text(seq, CleanProfile::Full));
    LabelScores scores;
    for (const auto& label : labels) scores[label] = score(tokens, label);
    out.push_back(std::move(scores));
  }
  return out;
}

// ---------------------------------------------------------------- remote

RemoteBackend::RemoteBackend(std::string base_url) : RemoteBackend(std::move(base_url), Options{}) {}

RemoteBackend::RemoteBackend(std::string base_url, Options options)
    : base_url_(std::move(base_url)), options_(options) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.empty()) throw InputError("remote backend URL is empty");
}

BackendInfo RemoteBackend::info() {
  {
    std::lock_guard lock(mutex_);
    if (info_) return *info_;
  }
  httplib::Client client(base_url_);
  client.set_read_timeout(options_.timeout_seconds, 0);
  auto res = client.Get("/healthz");
  if (!res) throw BackendUnavailable(base_url_ + "/healthz: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendUnavailable(base_url_ + "/healthz returned " + std::to_string(res->status));
  BackendInfo found;
  try {
    const json body = json::parse(res->body);
    found = {"remote:" + body.at("model").get<std::string>(), body.at("version").get<std::string>()};
  } catch (const json::exception& e) {
    throw BackendContractViolation(std::string("bad /healthz body: ") + e.what());
  }
  std::lock_guard lock(mutex_);
  info_ = found;
  return found;
}

std::vector<LabelScores> RemoteBackend::classify_batch(std::span<const std::string> sequences, const LabelSet& labels) {
  if (sequences.empty()) return {};
  if (sequences.size() > options_.max_batch) {
    throw BackendContractViolation("batch of " + std::to_string(sequences.size()) + " exceeds max " +
                                   std::to_string(options_.max_batch));
  }
  json request = json::array();
  for (const auto& seq : sequences) {
    request.push_back({{"sequence", seq}, {"candidate_labels", labels}, {"multi_label", true}});
  }
  httplib::Client client(base_url_);
  client.set_read_timeout(options_.timeout_seconds, 0);
  auto res = client.Post("/classify_batch", request.dump(), "application/json");
  if (!res) throw BackendUnavailable(base_url_ + "/classify_batch: " + httplib::to_string(res.error()));
  if (res->status == 503) throw BackendUnavailable("model still loading (HTTP 503)");
  if (res->status != 200) {
    throw BackendContractViolation("/classify_batch returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }

  std::vector<LabelScores> out;
  try {
    const json body = json::parse(res->body);
    if (!body.is_array() || body.size() != sequences.size()) {
      throw BackendContractViolation("response not aligned with request batch");
    }
    for (const auto& item : body) {
      const auto names = item.at("labels").get<std::vector<std::string>>();
      const auto values = item.at("scores").get<std::vector<double>>();
      if (names.size() != values.size()) throw BackendContractViolation("labels/scores length mismatch");
      LabelScores scores;
      for (std::size_t i = 0; i < names.size(); ++i) scores[names[i]] = values[i];
      for (const auto& label : labels) {
        if (!scores.contains(label)) throw BackendContractViolation("missing score for label \"" + label + "\"");
      }
      if (item.contains("model")) {
        std::lock_guard lock(mutex_);
        if (!info_) {
          info_ = BackendInfo{"remote:" + item["model"].value("name", std::string("unknown")),
                              item["model"].value("version", std::string("unknown"))};
        }
      }
      out.push_back(std::move(scores));
    }
  } catch (const json::exception& e) {
    throw BackendContractViolation(std::string("bad /classify_batch body: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------- assignment

TopicAssignment threshold_scores(const LabelScores& scores, const LabelSet& labels, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  TopicAssignment out;
  out.alpha = alpha;
  for (const auto& label : labels) {
    auto it = scores.find(label);
    if (it == scores.end()) throw BackendContractViolation("missing score for label \"" + label + "\"");
    const double s = it->second;
    if (!(s >= 0.0 && s <= 1.0)) {
      throw BackendContractViolation("score " + std::to_string(s) + " for \"" + label + "\" outside [0, 1]");
    }
    out.scores[label] = s;
    if (s >= alpha) out.assigned.push_back(label);
  }
  return out;
}

TopicAssignment assign_topics(const std::string& text_light, const LabelSet& labels, double alpha,
                              ClassifierBackend& backend) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  return threshold_scores(backend.classify(text_light, labels), labels, alpha);
}

std::vector<TopicAssignment> assign_topics_batch(std::span<const std::string> texts, const LabelSet& labels,
                                                 double alpha, ClassifierBackend& backend,
                                                 const AssignOptions& options) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  const std::size_t batch = std::max<std::size_t>(1, std::min(options.batch_size, backend.max_batch()));
  const std::size_t in_flight = std::max<std::size_t>(1, options.max_in_flight);

  std::vector<LabelScores> scores(texts.size());
  std::vector<std::future<void>> pending;
  auto drain_one = [&] {
    pending.front().get();
    pending.erase(pending.begin());
  };
  for (std::size_t start = 0; start < texts.size(); start += batch) {
    const std::size_t n = std::min(batch, texts.size() - start);
    if (pending.size() >= in_flight) drain_one();
    pending.push_back(std::async(std::launch::async, [&, start, n] {
      auto result = backend.classify_batch(texts.subspan(start, n), labels);
      if (result.size() != n) throw BackendContractViolation("batch result not aligned with request");
      std::move(result.begin(), result.end(), scores.begin() + static_cast<std::ptrdiff_t>(start));
    }));
  }
  // Surface the first failure only after every task has stopped touching `scores`.
  std::exception_ptr first_error;
  for (auto& f : pending) {
    try {
      f.get();
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<TopicAssignment> out;
  out.reserve(texts.size());
  for (const auto& s : scores) out.push_back(threshold_scores(s, labels, alpha));
  return out;
}

std::unique_ptr<ClassifierBackend> make_backend(const std::string& spec) {
  if (spec == "keyword") return std::make_unique<KeywordBackend>(KeywordBackend::builtin());
  if (spec.rfind("keyword:", 0) == 0) {
    return std::make_unique<KeywordBackend>(KeywordBackend::from_json_file(spec.substr(8)));
  }
  if (spec == "remote" || spec.rfind("remote:", 0) == 0) {
    std::string url = spec.size() > 7 ? spec.substr(7) : "";
    if (url.empty()) {
      if (const char* env = std::getenv("TWEETLENS_NLI_URL")) url = env;
    }
    if (url.empty()) throw InputError("remote backend needs a URL (remote:<url> or TWEETLENS_NLI_URL)");
    return std::make_unique<RemoteBackend>(url);
  }
  throw InputError("unknown backend \"" + spec + "\" (expected keyword[:<lexicon.json>] or remote:<url>)");
}

}  // namespace tweetlens
