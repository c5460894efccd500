#include "tweetlens/annotate.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "tweetlens/errors.hpp"

namespace tweetlens {

using nlohmann::json;

std::vector<Annotation> annotate_corpus(const std::vector<ProcessedTweet>& tweets, ClassifierBackend& backend,
                                        const AnnotateOptions& options) {
  std::vector<std::string> unique_texts;
  std::unordered_map<std::string, std::size_t> text_index;
  std::vector<std::size_t> slot(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    auto [it, inserted] = text_index.try_emplace(tweets[i].clean_light, unique_texts.size());
    if (inserted) unique_texts.push_back(tweets[i].clean_light);
    slot[i] = it->second;
  }

  const auto topics = assign_topics_batch(unique_texts, options.labels, options.alpha, backend, options.assign);
  const BackendInfo info = backend.info();

  std::vector<Annotation> out;
  out.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    Annotation a;
    a.tweet_id = tweets[i].tweet.id;
    a.sentiment = score_sentiment(tweets[i].clean_light);
    a.pov = classify_pov(tweets[i].clean_light);
    a.topics = topics[slot[i]];
    a.backend = info;
    out.push_back(std::move(a));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Annotation& x, const Annotation& y) { return id_less(x.tweet_id, y.tweet_id); });
  return out;
}

json annotation_to_json(const Annotation& a) {
  json obj;
  obj["id"] = a.tweet_id;
  obj["compound"] = a.sentiment.compound;
  obj["pos"] = a.sentiment.pos;
  obj["neu"] = a.sentiment.neu;
  obj["neg"] = a.sentiment.neg;
  obj["pov"] = std::string(to_string(a.pov));
  obj["scores"] = a.topics.scores;
  obj["assigned"] = a.topics.assigned;
  obj["alpha"] = a.topics.alpha;
  obj["backend"] = {{"name", a.backend.name}, {"version", a.backend.version}};
  return obj;
}

Annotation annotation_from_json(const json& obj) {
  Annotation a;
  try {
    a.tweet_id = obj.at("id").get<std::string>();
    a.sentiment.compound = obj.at("compound").get<double>();
    a.sentiment.pos = obj.at("pos").get<double>();
    a.sentiment.neu = obj.at("neu").get<double>();
    a.sentiment.neg = obj.at("neg").get<double>();
    const auto pov = pov_from_string(obj.at("pov").get<std::string>());
    if (!pov) throw InputError("unknown pov value");
    a.pov = *pov;
    a.topics.scores = obj.at("scores").get<LabelScores>();
    a.topics.assigned = obj.at("assigned").get<std::vector<std::string>>();
    a.topics.alpha = obj.at("alpha").get<double>();
    a.backend.name = obj.at("backend").at("name").get<std::string>();
    a.backend.version = obj.at("backend").at("version").get<std::string>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad annotation record: ") + e.what());
  }
  return a;
}

void write_annotations_jsonl(std::ostream& out, const std::vector<Annotation>& annotations) {
  for (const auto& a : annotations) out << annotation_to_json(a).dump() << '\n';
}

std::vector<Annotation> read_annotations_jsonl(std::istream& in) {
  std::vector<Annotation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(annotation_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw InputError(std::string("bad annotation line: ") + e.what());
    }
  }
  return out;
}

}  // namespace tweetlens
