#pragma once
// Data files from data/, compiled into the library.

#include <string_view>

namespace tweetlens::resources {

std::string_view stopwords_en();
std::string_view lemma_exceptions();
std::string_view vader_lexicon();
std::string_view topic_keywords();

}  // namespace tweetlens::resources
