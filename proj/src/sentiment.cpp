#include "tweetlens/sentiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tweetlens/resources.hpp"
#include "tweetlens/text.hpp"

namespace tweetlens {

namespace {

using sentiment::kAllCapsIncrement;
using sentiment::kBoosterIncrement;
using sentiment::kNegationScalar;

constexpr double kBoosterDecrement = -kBoosterIncrement;

const std::unordered_map<std::string, double>& boosters() {
  static const std::unordered_map<std::string, double> table = [] {
    std::unordered_map<std::string, double> t;
    for (const char* w :
         {"absolutely", "amazingly", "awfully", "completely", "considerable", "considerably", "decidedly",
          "deeply", "effing", "enormous", "enormously", "entirely", "especially", "exceptional",
          "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin", "frackin", "fracking",
          "fricking", "frickin", "frigging", "friggin", "fully", "fuckin", "fucking", "fuggin", "fugging",
          "greatly", "hella", "highly", "hugely", "incredible", "incredibly", "intensely", "major", "majorly",
          "more", "most", "particularly", "purely", "quite", "really", "remarkably", "so", "substantially",
          "thoroughly", "total", "totally", "tremendous", "tremendously", "uber", "unbelievably", "unusually",
          "utter", "utterly", "very"}) {
      t[w] = kBoosterIncrement;
    }
    for (const char* w :
         {"almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
          "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce", "scarcely",
          "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of"}) {
      t[w] = kBoosterDecrement;
    }
    return t;
  }();
  return table;
}

bool is_negation_word(const std::string& w) {
  static const std::array<std::string_view, 59> kNegate = {
      "aint",    "arent",   "cannot",  "cant",     "couldnt",   "darent",   "didnt",    "doesnt",   "ain't",
      "aren't",  "can't",   "couldn't", "daren't", "didn't",    "doesn't",  "dont",     "hadnt",    "hasnt",
      "havent",  "isnt",    "mightnt", "mustnt",   "neither",   "don't",    "hadn't",   "hasn't",   "haven't",
      "isn't",   "mightn't", "mustn't", "neednt",  "needn't",   "never",    "none",     "nope",     "nor",
      "not",     "nothing", "nowhere", "oughtnt",  "shant",     "shouldnt", "uhuh",     "wasnt",    "werent",
      "oughtn't", "shan't", "shouldn't", "uh-uh",  "wasn't",    "weren't",  "without",  "wont",     "wouldnt",
      "won't",   "wouldn't", "rarely", "seldom",   "despite"};
  if (std::find(kNegate.begin(), kNegate.end(), w) != kNegate.end()) return true;
  return w.find("n't") != std::string::npos;
}

const std::unordered_map<std::string, double>& special_cases() {
  static const std::unordered_map<std::string, double> table = {
      {"the shit", 3.0},      {"the bomb", 3.0},     {"bad ass", 1.5},      {"badass", 1.5},
      {"bus stop", 0.0},      {"yeah right", -2.0},  {"kiss of death", -1.5}, {"to die for", 3.0},
      {"beating heart", 3.5}};
  return table;
}

// str.isupper(): at least one cased character and no lowercase ones.
bool is_upper(std::string_view w) {
  bool cased = false;
  for (char c : w) {
    if (c >= 'a' && c <= 'z') return false;
    if (c >= 'A' && c <= 'Z') cased = true;
  }
  return cased;
}

bool is_ascii_punct(char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}

// Leading/trailing punctuation is stripped unless that leaves <= 2
// characters, which keeps emoticons such as ":)" intact.
std::string strip_punct_if_word(const std::string& token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && is_ascii_punct(token[b])) ++b;
  while (e > b && is_ascii_punct(token[e - 1])) --e;
  const std::string stripped = token.substr(b, e - b);
  if (text::codepoint_count(stripped) <= 2) return token;
  return stripped;
}

bool all_caps_differential(const std::vector<std::string>& words) {
  std::size_t caps = 0;
  for (const auto& w : words) caps += is_upper(w) ? 1 : 0;
  const std::size_t diff = words.size() - caps;
  return diff > 0 && diff < words.size();
}

double scalar_inc_dec(const std::string& word, const std::string& word_lower, double valence, bool cap_diff) {
  double scalar = 0.0;
  const auto& table = boosters();
  if (auto it = table.find(word_lower); it != table.end()) {
    scalar = it->second;
    if (valence < 0) scalar *= -1;
    if (is_upper(word) && cap_diff) {
      if (valence > 0) {
        scalar += kAllCapsIncrement;
      } else {
        scalar -= kAllCapsIncrement;
      }
    }
  }
  return scalar;
}

double negation_check(double valence, const std::vector<std::string>& lw, int start_i, std::size_t i) {
  if (start_i == 0) {
    if (is_negation_word(lw[i - 1])) valence *= kNegationScalar;
  } else if (start_i == 1) {
    if (lw[i - 2] == "never" && (lw[i - 1] == "so" || lw[i - 1] == "this")) {
      valence *= 1.25;
    } else if (lw[i - 2] == "without" && lw[i - 1] == "doubt") {
      // unchanged
    } else if (is_negation_word(lw[i - 2])) {
      valence *= kNegationScalar;
    }
  } else if (start_i == 2) {
    if ((lw[i - 3] == "never" && (lw[i - 2] == "so" || lw[i - 2] == "this")) ||
        (lw[i - 1] == "so" || lw[i - 1] == "this")) {
      valence *= 1.25;
    } else if (lw[i - 3] == "without" && (lw[i - 2] == "doubt" || lw[i - 1] == "doubt")) {
      // unchanged
    } else if (is_negation_word(lw[i - 3])) {
      valence *= kNegationScalar;
    }
  }
  return valence;
}

double special_idioms_check(double valence, const std::vector<std::string>& lw, std::size_t i) {
  const auto& cases = special_cases();
  const std::string onezero = lw[i - 1] + " " + lw[i];
  const std::string twoonezero = lw[i - 2] + " " + lw[i - 1] + " " + lw[i];
  const std::string twoone = lw[i - 2] + " " + lw[i - 1];
  const std::string threetwoone = lw[i - 3] + " " + lw[i - 2] + " " + lw[i - 1];
  const std::string threetwo = lw[i - 3] + " " + lw[i - 2];
  for (const std::string* seq : {&onezero, &twoonezero, &twoone, &threetwoone, &threetwo}) {
    if (auto it = cases.find(*seq); it != cases.end()) {
      valence = it->second;
      break;
    }
  }
  if (lw.size() - 1 > i) {
    const std::string zeroone = lw[i] + " " + lw[i + 1];
    if (auto it = cases.find(zeroone); it != cases.end()) valence = it->second;
  }
  if (lw.size() - 1 > i + 1) {
    const std::string zeroonetwo = lw[i] + " " + lw[i + 1] + " " + lw[i + 2];
    if (auto it = cases.find(zeroonetwo); it != cases.end()) valence = it->second;
  }
  const auto& boost = boosters();
  for (const std::string* gram : {&threetwoone, &threetwo, &twoone}) {
    if (auto it = boost.find(*gram); it != boost.end()) valence += it->second;
  }
  return valence;
}

// Contrastive "but": sentiment before the first "but" is halved, after it
// amplified by 1.5. Each update targets the first slot holding an equal
// value, which is how the reference method behaves with repeated values.
void but_check(const std::vector<std::string>& lw, std::vector<double>& sentiments) {
  const auto it = std::find(lw.begin(), lw.end(), "but");
  if (it == lw.end()) return;
  const auto bi = static_cast<std::size_t>(it - lw.begin());
  for (std::size_t k = 0; k < sentiments.size(); ++k) {
    const double value = sentiments[k];
    const auto si = static_cast<std::size_t>(std::find(sentiments.begin(), sentiments.end(), value) - sentiments.begin());
    if (si < bi) {
      sentiments[si] = value * 0.5;
    } else if (si > bi) {
      sentiments[si] = value * 1.5;
    }
  }
}

double punctuation_emphasis(std::string_view text) {
  auto ep = static_cast<double>(std::min<std::ptrdiff_t>(std::count(text.begin(), text.end(), '!'), 4));
  const double ep_amplifier = ep * sentiment::kExclamationIncrement;
  const auto qm_count = std::count(text.begin(), text.end(), '?');
  double qm_amplifier = 0.0;
  if (qm_count > 1) qm_amplifier = qm_count <= 3 ? static_cast<double>(qm_count) * 0.18 : 0.96;
  return ep_amplifier + qm_amplifier;
}

}  // namespace

namespace sentiment {

double normalize(double score, double alpha) {
  const double norm = score / std::sqrt(score * score + alpha);
  return std::clamp(norm, -1.0, 1.0);
}

}  // namespace sentiment

SentimentAnalyzer::SentimentAnalyzer(std::string_view lexicon_tsv) {
  std::size_t start = 0;
  while (start < lexicon_tsv.size()) {
    std::size_t end = lexicon_tsv.find('\n', start);
    if (end == std::string_view::npos) end = lexicon_tsv.size();
    std::string_view line = lexicon_tsv.substr(start, end - start);
    start = end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) continue;
    const std::size_t tab2 = line.find('\t', tab + 1);
    const std::string measure(line.substr(tab + 1, tab2 == std::string_view::npos ? std::string_view::npos : tab2 - tab - 1));
    lexicon_[std::string(line.substr(0, tab))] = std::stod(measure);
  }
}

const SentimentAnalyzer& SentimentAnalyzer::builtin() {
  static const SentimentAnalyzer instance(resources::vader_lexicon());
  return instance;
}

double SentimentAnalyzer::valence_of(std::size_t i, const std::vector<std::string>& words,
                                     const std::vector<std::string>& lw, bool cap_diff) const {
  double valence = 0.0;
  const std::string& item = words[i];
  const std::string& item_lower = lw[i];
  auto lex = lexicon_.find(item_lower);
  if (lex == lexicon_.end()) return valence;

  valence = lex->second;
  // "no" directly before another lexicon word acts as a negator, not a valence.
  if (item_lower == "no" && i != words.size() - 1 && in_lexicon(lw[i + 1])) valence = 0.0;
  if ((i > 0 && lw[i - 1] == "no") || (i > 1 && lw[i - 2] == "no") ||
      (i > 2 && lw[i - 3] == "no" && (lw[i - 1] == "or" || lw[i - 1] == "nor"))) {
    valence = lex->second * kNegationScalar;
  }

  if (is_upper(item) && cap_diff) {
    if (valence > 0) {
      valence += kAllCapsIncrement;
    } else {
      valence -= kAllCapsIncrement;
    }
  }

  for (int start_i = 0; start_i < 3; ++start_i) {
    const auto offset = static_cast<std::size_t>(start_i + 1);
    if (i > static_cast<std::size_t>(start_i) && !in_lexicon(lw[i - offset])) {
      double s = scalar_inc_dec(words[i - offset], lw[i - offset], valence, cap_diff);
      if (start_i == 1 && s != 0) s *= 0.95;
      if (start_i == 2 && s != 0) s *= 0.9;
      valence = valence + s;
      valence = negation_check(valence, lw, start_i, i);
      if (start_i == 2) valence = special_idioms_check(valence, lw, i);
    }
  }

  // "least" as negator, except in "at least" / "very least".
  if (i > 1 && !in_lexicon(lw[i - 1]) && lw[i - 1] == "least") {
    if (lw[i - 2] != "at" && lw[i - 2] != "very") valence *= kNegationScalar;
  } else if (i > 0 && !in_lexicon(lw[i - 1]) && lw[i - 1] == "least") {
    valence *= kNegationScalar;
  }
  return valence;
}

SentimentScore SentimentAnalyzer::score(std::string_view text) const {
  std::vector<std::string> words;
  for (const auto& token : split_whitespace(text)) words.push_back(strip_punct_if_word(token));
  std::vector<std::string> lw;
  lw.reserve(words.size());
  for (const auto& w : words) lw.push_back(text::ascii_lower(w));
  const bool cap_diff = all_caps_differential(words);

  std::vector<double> sentiments;
  sentiments.reserve(words.size());
  const auto& boost = boosters();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (boost.contains(lw[i])) {
      sentiments.push_back(0.0);
      continue;
    }
    if (i < words.size() - 1 && lw[i] == "kind" && lw[i + 1] == "of") {
      sentiments.push_back(0.0);
      continue;
    }
    sentiments.push_back(valence_of(i, words, lw, cap_diff));
  }
  but_check(lw, sentiments);

  SentimentScore out;
  if (sentiments.empty()) return out;

  double sum = 0.0;
  for (double s : sentiments) sum += s;
  const double emphasis = punctuation_emphasis(text);
  if (sum > 0) {
    sum += emphasis;
  } else if (sum < 0) {
    sum -= emphasis;
  }
  out.compound = sentiment::normalize(sum);

  double pos_sum = 0.0;
  double neg_sum = 0.0;
  double neu_count = 0.0;
  for (double s : sentiments) {
    if (s > 0) pos_sum += s + 1;
    if (s < 0) neg_sum += s - 1;
    if (s == 0) neu_count += 1;
  }
  if (pos_sum > std::fabs(neg_sum)) {
    pos_sum += emphasis;
  } else if (pos_sum < std::fabs(neg_sum)) {
    neg_sum -= emphasis;
  }
  const double total = pos_sum + std::fabs(neg_sum) + neu_count;
  out.pos = std::fabs(pos_sum / total);
  out.neg = std::fabs(neg_sum / total);
  out.neu = std::fabs(neu_count / total);
  return out;
}

}  // namespace tweetlens
