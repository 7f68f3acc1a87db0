#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace faqrank {

/// Lowercased alphanumeric tokens in text order. `len()` is the query
/// length fed to the damping factor.
struct TokenStream {
  std::vector<std::string> tokens;

  std::size_t len() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  bool operator==(const TokenStream&) const = default;
};

/// Splits UTF-8 text on every code point that is not a letter, digit or
/// combining mark, then lowercases (Latin, Greek and Cyrillic case pairs).
/// Bytes that are not valid UTF-8 act as separators. No stemming and no
/// stopword removal.
TokenStream tokenize(std::string_view text);

/// Tokens joined by single spaces.
std::string join(const TokenStream& stream);

}  // namespace faqrank
