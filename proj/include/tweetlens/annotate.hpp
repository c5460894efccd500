#pragma once
// Per-tweet enrichment: sentiment, point of view and topic labels.

#include <iosfwd>
#include <string>
#include <vector>

#include "tweetlens/corpus.hpp"
#include "tweetlens/pov.hpp"
#include "tweetlens/sentiment.hpp"
#include "tweetlens/topics.hpp"

namespace tweetlens {

struct Annotation {
  std::string tweet_id;
  SentimentScore sentiment;
  PovClass pov = PovClass::Impersonal;
  TopicAssignment topics;
  BackendInfo backend;
};

struct AnnotateOptions {
  LabelSet labels = default_labels();
  double alpha = kDefaultAlpha;
  AssignOptions assign;
};

// Identical LIGHT texts share one backend query. Output is ordered by tweet id.
std::vector<Annotation> annotate_corpus(const std::vector<ProcessedTweet>& tweets, ClassifierBackend& backend,
                                        const AnnotateOptions& options = {});

nlohmann::json annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& obj);
void write_annotations_jsonl(std::ostream& out, const std::vector<Annotation>& annotations);
std::vector<Annotation> read_annotations_jsonl(std::istream& in);

}  // namespace tweetlens
