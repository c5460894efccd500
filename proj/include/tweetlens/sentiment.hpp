#pragma once
// Lexicon-and-rules sentiment scoring for short social-media text.

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tweetlens {

struct SentimentScore {
  double compound = 0.0;  // in [-1, 1]
  double pos = 0.0;
  double neu = 1.0;
  double neg = 0.0;
};

class SentimentAnalyzer {
 public:
  // Tab-separated lexicon: token, mean valence, (ignored columns...).
  explicit SentimentAnalyzer(std::string_view lexicon_tsv);

  static const SentimentAnalyzer& builtin();

  // Expects punctuation and capitalization intact (LIGHT-cleaned text).
  SentimentScore score(std::string_view text) const;

  std::size_t lexicon_size() const noexcept { return lexicon_.size(); }

 private:
  double valence_of(std::size_t i, const std::vector<std::string>& words,
                    const std::vector<std::string>& lower, bool cap_diff) const;
  bool in_lexicon(const std::string& lower_word) const { return lexicon_.contains(lower_word); }

  std::unordered_map<std::string, double> lexicon_;
};

inline SentimentScore score_sentiment(std::string_view text_light) {
  return SentimentAnalyzer::builtin().score(text_light);
}

namespace sentiment {

inline constexpr double kBoosterIncrement = 0.293;
inline constexpr double kAllCapsIncrement = 0.733;
inline constexpr double kNegationScalar = -0.74;
inline constexpr double kExclamationIncrement = 0.292;
inline constexpr double kNormalizationAlpha = 15.0;

// x / sqrt(x^2 + alpha), clamped to [-1, 1].
double normalize(double score, double alpha = kNormalizationAlpha);

}  // namespace sentiment

}  // namespace tweetlens
