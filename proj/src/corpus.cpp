#include "tweetlens/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "tweetlens/errors.hpp"
#include "tweetlens/text.hpp"

namespace tweetlens {

using nlohmann::json;

std::string_view to_string(TweetKind kind) noexcept {
  switch (kind) {
    case TweetKind::Original: return "original";
    case TweetKind::Retweet: return "retweet";
    case TweetKind::Reply: return "reply";
  }
  return "original";
}

TimeWindow make_window(Timestamp start, Timestamp end) {
  if (start > end) throw InvalidWindow();
  return {start, end};
}

Timestamp parse_timestamp(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  const std::string str(s);
  int consumed = 0;
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3 || consumed != 10) {
    throw InputError("bad timestamp: \"" + str + "\"");
  }
  std::size_t pos = 10;
  if (pos < str.size()) {
    if (str[pos] != 'T' && str[pos] != ' ') throw InputError("bad timestamp: \"" + str + "\"");
    int n = 0;
    if (std::sscanf(str.c_str() + pos + 1, "%2d:%2d:%2d%n", &h, &mi, &sec, &n) != 3 || n != 8) {
      throw InputError("bad timestamp: \"" + str + "\"");
    }
    pos += 9;
    if (pos < str.size() && str[pos] == '.') {
      ++pos;
      while (pos < str.size() && std::isdigit(static_cast<unsigned char>(str[pos]))) ++pos;
    }
    const std::string_view zone = std::string_view(str).substr(pos);
    if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000")) {
      throw InputError("timestamp must be UTC: \"" + str + "\"");
    }
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw InputError("bad timestamp: \"" + str + "\"");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

Timestamp parse_window_end(std::string_view s) {
  Timestamp t = parse_timestamp(s);
  if (s.size() == 10) t += std::chrono::hours{24} - std::chrono::seconds{1};
  return t;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

namespace {

const json& require(const json& obj, const char* field, std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end()) throw MissingField(line_no, field);
  return *it;
}

std::string require_string(const json& obj, const char* field, std::size_t line_no) {
  const json& v = require(obj, field, line_no);
  if (!v.is_string()) throw MalformedLine(line_no, std::string(field) + " must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* field, std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw MalformedLine(line_no, std::string(field) + " must be a string or null");
  return it->get<std::string>();
}

json nullable(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Tweet tweet_from_json(const json& obj, std::size_t line_no) {
  if (!obj.is_object()) throw MalformedLine(line_no, "expected a JSON object");
  Tweet t;
  t.id = require_string(obj, "id", line_no);
  t.text = require_string(obj, "text", line_no);
  t.lang = require_string(obj, "lang", line_no);
  try {
    t.created_at = parse_timestamp(require_string(obj, "created_at", line_no));
  } catch (const MissingField&) {
    throw;
  } catch (const InputError& e) {
    throw MalformedLine(line_no, e.what());
  }
  t.author_id = require_string(obj, "author_id", line_no);
  const json& followers = require(obj, "author_followers", line_no);
  if (!followers.is_number_integer() || followers.get<std::int64_t>() < 0) {
    throw MalformedLine(line_no, "author_followers must be a non-negative integer");
  }
  t.author_followers = followers.get<std::uint64_t>();
  t.author_location = optional_string(obj, "author_location", line_no);
  const std::string kind = require_string(obj, "kind", line_no);
  if (kind == "original") {
    t.kind = TweetKind::Original;
  } else if (kind == "retweet") {
    t.kind = TweetKind::Retweet;
  } else if (kind == "reply") {
    t.kind = TweetKind::Reply;
  } else {
    throw MalformedLine(line_no, "unknown kind \"" + kind + "\"");
  }
  t.ref_tweet_id = optional_string(obj, "ref_tweet_id", line_no);
  t.ref_author_id = optional_string(obj, "ref_author_id", line_no);
  if (t.kind != TweetKind::Original) {
    if (!t.ref_tweet_id) throw MissingField(line_no, "ref_tweet_id");
    if (!t.ref_author_id) throw MissingField(line_no, "ref_author_id");
  }
  return t;
}

json tweet_to_json(const Tweet& t) {
  json obj;
  obj["id"] = t.id;
  obj["text"] = t.text;
  obj["lang"] = t.lang;
  obj["created_at"] = format_timestamp(t.created_at);
  obj["author_id"] = t.author_id;
  obj["author_followers"] = t.author_followers;
  obj["author_location"] = nullable(t.author_location);
  obj["kind"] = std::string(to_string(t.kind));
  obj["ref_tweet_id"] = nullable(t.ref_tweet_id);
  obj["ref_author_id"] = nullable(t.ref_author_id);
  return obj;
}

namespace {

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedLine(line_no, e.what());
    }
    fn(obj, line_no);
  }
}

}  // namespace

Corpus read_jsonl(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  for_each_record(in, [&](const json& obj, std::size_t line_no) {
    Tweet t = tweet_from_json(obj, line_no);
    if (!seen.insert(t.id).second) throw MalformedLine(line_no, "duplicate id \"" + t.id + "\"");
    corpus.tweets.push_back(std::move(t));
  });
  return corpus;
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const Tweet& t : corpus.tweets) out << tweet_to_json(t).dump() << '\n';
}

Corpus filter_corpus(const Corpus& corpus, TimeWindow window, const std::vector<std::string>& exclusion_terms) {
  if (window.start > window.end) throw InvalidWindow();
  std::vector<std::string> terms;
  for (const auto& term : exclusion_terms) {
    if (!term.empty()) terms.push_back(text::ascii_lower(term));
  }
  Corpus out;
  out.window = window;
  out.exclusion_terms = terms;
  for (const Tweet& t : corpus.tweets) {
    if (!window.contains(t.created_at)) continue;
    const std::string folded = text::ascii_lower(t.text);
    bool excluded = false;
    for (const auto& term : terms) {
      if (folded.find(term) != std::string::npos) {
        excluded = true;
        break;
      }
    }
    if (!excluded) out.tweets.push_back(t);
  }
  return out;
}

Corpus dedupe_unique_texts(const Corpus& corpus) {
  Corpus out;
  out.window = corpus.window;
  out.exclusion_terms = corpus.exclusion_terms;
  std::unordered_set<std::string> seen;
  for (const Tweet& t : corpus.tweets) {
    if (seen.insert(clean_text(t.text, CleanProfile::Light)).second) out.tweets.push_back(t);
  }
  return out;
}

Tweet translate(const Tweet& tweet, TranslatorBackend& backend) {
  if (tweet.lang == "en") return tweet;
  Tweet out = tweet;
  out.text = backend.translate(tweet.text, tweet.lang);
  out.lang = "en";
  return out;
}

std::vector<ProcessedTweet> preprocess(const Corpus& corpus, TranslatorBackend& translator,
                                       const PreprocessOptions& options) {
  std::vector<ProcessedTweet> out;
  out.reserve(corpus.tweets.size());
  for (const Tweet& raw : corpus.tweets) {
    ProcessedTweet p;
    try {
      p.tweet = translate(raw, translator);
    } catch (const BackendError&) {
      if (!options.skip_translation_errors) throw;
      p.tweet = raw;
    }
    p.clean_full = clean_text(p.tweet.text, CleanProfile::Full);
    p.clean_light = clean_text(p.tweet.text, CleanProfile::Light);
    p.tokens = tokenize(p.clean_full);
    out.push_back(std::move(p));
  }
  return out;
}

json processed_to_json(const ProcessedTweet& p) {
  json obj = tweet_to_json(p.tweet);
  obj["clean_full"] = p.clean_full;
  obj["clean_light"] = p.clean_light;
  obj["tokens"] = p.tokens;
  return obj;
}

ProcessedTweet processed_from_json(const json& obj, std::size_t line_no) {
  ProcessedTweet p;
  p.tweet = tweet_from_json(obj, line_no);
  p.clean_full = require_string(obj, "clean_full", line_no);
  p.clean_light = require_string(obj, "clean_light", line_no);
  const json& tokens = require(obj, "tokens", line_no);
  if (!tokens.is_array()) throw MalformedLine(line_no, "tokens must be an array");
  p.tokens = tokens.get<std::vector<std::string>>();
  return p;
}

void write_processed_jsonl(std::ostream& out, const std::vector<ProcessedTweet>& tweets) {
  for (const auto& p : tweets) out << processed_to_json(p).dump() << '\n';
}

std::vector<ProcessedTweet> read_processed_jsonl(std::istream& in) {
  std::vector<ProcessedTweet> out;
  for_each_record(in, [&](const json& obj, std::size_t line_no) { out.push_back(processed_from_json(obj, line_no)); });
  return out;
}

}  // namespace tweetlens
