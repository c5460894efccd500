#include "tweetlens/pov.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "tweetlens/text.hpp"

namespace tweetlens {

namespace {

constexpr std::array<std::string_view, 10> kFirst = {"i", "me", "my", "mine", "we", "us", "our", "ours", "myself", "ourselves"};
constexpr std::array<std::string_view, 5> kSecond = {"you", "your", "yours", "yourself", "yourselves"};
constexpr std::array<std::string_view, 16> kThird = {"he",  "she",  "it",  "they", "him",    "her",     "them",    "his",
                                                     "hers", "its", "their", "theirs", "himself", "herself", "itself", "themselves"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& list, std::string_view w) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

// "I'm" -> "i", "(we" -> "we": trim punctuation and split off clitics.
std::string core_word(const std::string& token) {
  std::string lower = text::ascii_lower(token);
  std::size_t b = 0;
  std::size_t e = lower.size();
  auto punct = [](char c) { return static_cast<unsigned char>(c) < 0x80 && text::is_punctuation(static_cast<char32_t>(c)); };
  while (b < e && punct(lower[b])) ++b;
  while (e > b && punct(lower[e - 1])) --e;
  lower = lower.substr(b, e - b);
  for (std::string_view apostrophe : {"'", "\xE2\x80\x99"}) {
    if (const auto at = lower.find(apostrophe); at != std::string::npos) lower.resize(at);
  }
  return lower;
}

}  // namespace

std::string_view to_string(PovClass pov) noexcept {
  switch (pov) {
    case PovClass::First: return "first";
    case PovClass::Second: return "second";
    case PovClass::Third: return "third";
    case PovClass::Impersonal: return "impersonal";
  }
  return "impersonal";
}

std::optional<PovClass> pov_from_string(std::string_view s) noexcept {
  if (s == "first") return PovClass::First;
  if (s == "second") return PovClass::Second;
  if (s == "third") return PovClass::Third;
  if (s == "impersonal") return PovClass::Impersonal;
  return std::nullopt;
}

PovClass classify_pov(std::string_view text_light) {
  bool second = false;
  bool third = false;
  for (const auto& token : split_whitespace(text_light)) {
    const std::string w = core_word(token);
    if (contains(kFirst, w)) return PovClass::First;
    second = second || contains(kSecond, w);
    third = third || contains(kThird, w);
  }
  if (second) return PovClass::Second;
  if (third) return PovClass::Third;
  return PovClass::Impersonal;
}

}  // namespace tweetlens
