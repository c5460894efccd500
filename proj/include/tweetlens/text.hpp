#pragma once
// Tweet text normalization: reserved-token stripping, punctuation removal,
// case folding, stopword removal and dictionary lemmatization.

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tweetlens {

// FULL runs every normalization step. LIGHT stops after URL / reserved word /
// emoji removal so punctuation and case survive for the sentiment rules and
// the zero-shot classifier.
enum class CleanProfile { Full, Light };

std::string clean_text(std::string_view raw, CleanProfile profile);

// Whitespace split; tokens made only of punctuation are dropped.
std::vector<std::string> tokenize(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

bool is_stopword(std::string_view word);
// The bundled 179-entry English list, in file order.
const std::vector<std::string>& stopword_list();

enum class PartOfSpeech { Noun, Verb };

class Lemmatizer {
 public:
  // Parses a `word<TAB>lemma<TAB>pos` table; '#' lines are comments.
  explicit Lemmatizer(std::string_view exception_table);

  static const Lemmatizer& builtin();

  // Applied to a fixed point, so lemmatize(lemmatize(w)) == lemmatize(w).
  std::string lemmatize(std::string_view word, PartOfSpeech pos = PartOfSpeech::Noun) const;

 private:
  std::string apply_once(const std::string& word, PartOfSpeech pos) const;

  std::unordered_map<std::string, std::string> nouns_;
  std::unordered_map<std::string, std::string> verbs_;
};

namespace text {

std::string ascii_lower(std::string_view s);
bool is_emoji(char32_t cp) noexcept;
bool is_punctuation(char32_t cp) noexcept;
// Decodes one code point at `pos` and advances it; malformed bytes decode to
// their raw byte value.
char32_t next_codepoint(std::string_view s, std::size_t& pos) noexcept;
std::size_t codepoint_count(std::string_view s) noexcept;

}  // namespace text

}  // namespace tweetlens
