#include "tweetlens/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <iterator>

#include "tweetlens/resources.hpp"

namespace tweetlens {

namespace text {

char32_t next_codepoint(std::string_view s, std::size_t& pos) noexcept {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) -> int {
    if (pos + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return b0;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++pos;
      return b0;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  pos += static_cast<std::size_t>(len);
  return cp;
}

std::size_t codepoint_count(std::string_view s) noexcept {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) next_codepoint(s, pos);
  return n;
}

bool is_emoji(char32_t cp) noexcept {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // pictographs, emoticons, flags, skin tones
         (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
         (cp >= 0x2300 && cp <= 0x23FF) ||    // misc technical (watch, hourglass, ...)
         (cp >= 0x2B00 && cp <= 0x2BFF) ||    // stars, arrows, circles
         (cp >= 0xFE00 && cp <= 0xFE0F) ||    // variation selectors
         (cp >= 0xE0020 && cp <= 0xE007F) ||  // tag sequences
         cp == 0x200D || cp == 0x20E3 || cp == 0x3030 || cp == 0x303D || cp == 0x3297 || cp == 0x3299;
}

bool is_punctuation(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
           (cp >= 0x7B && cp <= 0x7E);
  }
  return cp == 0xA1 || cp == 0xA7 || cp == 0xAB || cp == 0xB6 || cp == 0xB7 || cp == 0xBB || cp == 0xBF ||
         (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3003) ||
         (cp >= 0x3008 && cp <= 0x3011) || (cp >= 0xFF01 && cp <= 0xFF0F);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace text

namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Emoji become spaces so "home😭flooded" still splits into two words.
std::string strip_emoji(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = text::next_codepoint(s, pos);
    if (text::is_emoji(cp)) {
      out.push_back(' ');
    } else {
      out.append(s.substr(start, pos - start));
    }
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return (x >= 'A' && x <= 'Z' ? x - 'A' + 'a' : x) == (y >= 'A' && y <= 'Z' ? y - 'A' + 'a' : y);
         });
}

std::size_t ifind(std::string_view hay, std::string_view needle) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (iequals(hay.substr(i, needle.size()), needle)) return i;
  }
  return std::string_view::npos;
}

// Drops everything from the first URL-looking substring to the end of the token.
std::string_view strip_url(std::string_view token) {
  std::size_t cut = std::string_view::npos;
  for (std::string_view marker : {"http://", "https://"}) {
    cut = std::min(cut, ifind(token, marker));
  }
  for (std::string_view marker : {"www.", "t.co/"}) {
    std::size_t at = ifind(token, marker);
    while (at != std::string_view::npos) {
      const bool boundary = at == 0 || !std::isalnum(static_cast<unsigned char>(token[at - 1]));
      if (boundary) {
        cut = std::min(cut, at);
        break;
      }
      const std::size_t next = ifind(token.substr(at + 1), marker);
      at = next == std::string_view::npos ? next : at + 1 + next;
    }
  }
  return cut == std::string_view::npos ? token : token.substr(0, cut);
}

bool is_reserved_word(std::string_view token) { return iequals(token, "rt") || iequals(token, "fav"); }

std::string remove_punctuation_and_fold(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  std::size_t pos = 0;
  while (pos < token.size()) {
    char32_t cp = text::next_codepoint(token, pos);
    if (text::is_punctuation(cp)) continue;
    if (cp >= 'A' && cp <= 'Z') {
      cp += 'a' - 'A';
    } else if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) {
      cp += 0x20;
    }
    append_utf8(out, cp);
  }
  return out;
}

struct StopwordTable {
  std::vector<std::string> ordered;
  std::unordered_set<std::string> lookup;
};

const StopwordTable& stopword_table() {
  static const StopwordTable table = [] {
    StopwordTable t;
    for (const auto& w : split_whitespace(resources::stopwords_en())) {
      t.ordered.push_back(w);
      t.lookup.insert(w);
      // FULL cleaning deletes apostrophes before the stopword check.
      std::string bare;
      std::copy_if(w.begin(), w.end(), std::back_inserter(bare), [](char c) { return c != '\''; });
      t.lookup.insert(bare);
    }
    return t;
  }();
  return table;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

bool is_stopword(std::string_view word) { return stopword_table().lookup.contains(std::string(word)); }

const std::vector<std::string>& stopword_list() { return stopword_table().ordered; }

std::string clean_text(std::string_view raw, CleanProfile profile) {
  const std::string no_emoji = strip_emoji(raw);
  const Lemmatizer& lemmatizer = Lemmatizer::builtin();
  std::string out;
  for (const std::string& token : split_whitespace(no_emoji)) {
    const std::string_view kept = strip_url(token);
    if (kept.empty() || kept.front() == '#' || kept.front() == '@' || is_reserved_word(kept)) continue;

    std::string word;
    if (profile == CleanProfile::Light) {
      word = kept;
    } else {
      word = remove_punctuation_and_fold(kept);
      if (word.empty() || is_reserved_word(word) || is_stopword(word)) continue;
      word = lemmatizer.lemmatize(word);
      if (word.empty() || is_reserved_word(word) || is_stopword(word)) continue;
    }
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (auto& token : split_whitespace(s)) {
    bool all_punct = true;
    std::size_t pos = 0;
    while (pos < token.size() && all_punct) all_punct = text::is_punctuation(text::next_codepoint(token, pos));
    if (!all_punct) out.push_back(std::move(token));
  }
  return out;
}

Lemmatizer::Lemmatizer(std::string_view exception_table) {
  std::size_t start = 0;
  while (start < exception_table.size()) {
    std::size_t end = exception_table.find('\n', start);
    if (end == std::string_view::npos) end = exception_table.size();
    std::string_view line = exception_table.substr(start, end - start);
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_whitespace(line);
    if (fields.size() < 3) continue;
    (fields[2] == "v" ? verbs_ : nouns_)[fields[0]] = fields[1];
  }
}

const Lemmatizer& Lemmatizer::builtin() {
  static const Lemmatizer instance(resources::lemma_exceptions());
  return instance;
}

std::string Lemmatizer::lemmatize(std::string_view word, PartOfSpeech pos) const {
  std::string current(word);
  for (int i = 0; i < 4; ++i) {
    std::string next = apply_once(current, pos);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::string Lemmatizer::apply_once(const std::string& w, PartOfSpeech pos) const {
  const auto& table = pos == PartOfSpeech::Noun ? nouns_ : verbs_;
  if (auto it = table.find(w); it != table.end()) return it->second;
  if (w.size() <= 3) return w;

  auto drop = [&](std::size_t n) { return w.substr(0, w.size() - n); };
  if (pos == PartOfSpeech::Noun) {
    if (ends_with(w, "ies") && w.size() > 4) return drop(3) + "y";
    if (ends_with(w, "sses") || ends_with(w, "xes") || ends_with(w, "zes") || ends_with(w, "ches") ||
        ends_with(w, "shes")) {
      return drop(2);
    }
    if (ends_with(w, "men") && w.size() > 4) return drop(3) + "man";
    if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
    if (ends_with(w, "s")) return drop(1);
    return w;
  }

  auto undouble = [](std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] && std::string_view("bdgklmnprt").find(stem[n - 1]) != std::string_view::npos) {
      stem.pop_back();
    }
    return stem;
  };
  if (ends_with(w, "ies") || ends_with(w, "ied")) return drop(3) + "y";
  if (ends_with(w, "ing") && w.size() > 5) return undouble(drop(3));
  if (ends_with(w, "ed") && w.size() > 4) return undouble(drop(2));
  if (ends_with(w, "sses") || ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes")) return drop(2);
  if (ends_with(w, "ss")) return w;
  if (ends_with(w, "s")) return drop(1);
  return w;
}

}  // namespace tweetlens
