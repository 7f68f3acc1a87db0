#include "faqrank/textproc.hpp"

#include <cstdint>
#include <optional>

namespace faqrank {
namespace {

struct Decoded {
  char32_t cp;
  std::size_t width;
};

// Returns nullopt for a malformed sequence; the caller skips one byte.
std::optional<Decoded> decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return Decoded{b0, 1};
  std::size_t width = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    width = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    width = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    width = 4;
    cp = b0 & 0x07;
  } else {
    return std::nullopt;
  }
  if (i + width > s.size()) return std::nullopt;
  for (std::size_t k = 1; k < width; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMinForWidth[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMinForWidth[width] || cp > 0x10FFFF) return std::nullopt;
  if (cp >= 0xD800 && cp <= 0xDFFF) return std::nullopt;
  return Decoded{cp, width};
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return in(cp, U'a', U'z') || in(cp, U'A', U'Z') || in(cp, U'0', U'9');
  }
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  // Separators, punctuation, symbols, emoji and specials.
  if (cp == 0x1680 || in(cp, 0x2000, 0x2BFF) || in(cp, 0x2E00, 0x2E7F) ||
      in(cp, 0x3000, 0x303F) || in(cp, 0xFE10, 0xFE1F) ||
      in(cp, 0xFE30, 0xFE4F) || cp == 0xFEFF || in(cp, 0xFF01, 0xFF0F) ||
      in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
      in(cp, 0xFF5B, 0xFF65) || in(cp, 0xFFF0, 0xFFFF) ||
      in(cp, 0x1F000, 0x1FAFF)) {
    return false;
  }
  return true;
}

char32_t to_lower(char32_t cp) {
  if (in(cp, U'A', U'Z')) return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x100, 0x137) || in(cp, 0x14A, 0x177)) return cp | 1U;
  if (in(cp, 0x139, 0x148) || in(cp, 0x179, 0x17E)) return (cp & 1U) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp == 0x386) return 0x3AC;
  if (in(cp, 0x388, 0x38A)) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (in(cp, 0x38E, 0x38F)) return cp + 0x3F;
  if (in(cp, 0x391, 0x3AB) && cp != 0x3A2) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x460, 0x481) || in(cp, 0x48A, 0x4BF) || in(cp, 0x1E00, 0x1E95) ||
      in(cp, 0x1EA0, 0x1EFF)) {
    return cp | 1U;
  }
  if (in(cp, 0xFF21, 0xFF3A)) return cp + 0x20;
  return cp;
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

}  // namespace

TokenStream tokenize(std::string_view text) {
  TokenStream stream;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) stream.tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    auto decoded = decode_utf8(text, i);
    if (!decoded) {
      flush();
      ++i;
      continue;
    }
    if (is_word_char(decoded->cp)) {
      append_utf8(current, to_lower(decoded->cp));
    } else {
      flush();
    }
    i += decoded->width;
  }
  flush();
  return stream;
}

std::string join(const TokenStream& stream) {
  std::string out;
  for (const auto& token : stream.tokens) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

}  // namespace faqrank
