#pragma once
// Grammatical point of view by pronoun precedence: first > second > third.

#include <optional>
#include <string_view>

namespace tweetlens {

enum class PovClass { First, Second, Third, Impersonal };

std::string_view to_string(PovClass pov) noexcept;
std::optional<PovClass> pov_from_string(std::string_view s) noexcept;

PovClass classify_pov(std::string_view text_light);

}  // namespace tweetlens
