#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "tweetlens/pov.hpp"

using namespace tweetlens;

TEST_CASE("precedence examples") {
  CHECK(classify_pov("I lost my home but you helped them") == PovClass::First);
  CHECK(classify_pov("you should donate to them") == PovClass::Second);
  CHECK(classify_pov("they lost it all") == PovClass::Third);
  CHECK(classify_pov("cyclone landfall at noon") == PovClass::Impersonal);
  CHECK(classify_pov("") == PovClass::Impersonal);
}

TEST_CASE("hand-labeled fixture") {
  const auto rows = testing::read_tsv(testing::data_path("pov_fixture.tsv"));
  REQUIRE(rows.size() == 60);
  for (const auto& row : rows) {
    CAPTURE(row[1]);
    CHECK(to_string(classify_pov(row[1])) == row[0]);
  }
}

TEST_CASE("property: appending a first-person pronoun forces First; case does not matter") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words = {"you", "they", "them", "your", "it", "cyclone", "help", "He", "SHE", "the"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> len(0, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string s;
    for (int i = len(rng); i > 0; --i) s += (s.empty() ? "" : " ") + (trial % 2 ? words[pick(rng)] : testing::random_word(rng));
    CAPTURE(s);
    CHECK(classify_pov(s + " I") == PovClass::First);
    std::string upper = s;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    CHECK(classify_pov(upper) == classify_pov(s));
  }
}

TEST_CASE("string round trip") {
  for (auto p : {PovClass::First, PovClass::Second, PovClass::Third, PovClass::Impersonal}) {
    CHECK(pov_from_string(to_string(p)) == p);
  }
  CHECK_FALSE(pov_from_string("fourth").has_value());
}
