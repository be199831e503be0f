#include "seminfo/textnorm.hpp"

#include <array>
#include <cctype>

namespace seminfo {

namespace {

constexpr std::array<std::string_view, 8> kPtbEscapes = {
    "-LRB-", "-RRB-", "-LCB-", "-RCB-", "-LSB-", "-RSB-", "``", "''"};

bool is_punct_codepoint(std::uint32_t c) {
  if (c < 0x80) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  }
  // Common non-ASCII punctuation: general/supplemental punctuation blocks,
  // Latin-1 punctuation, CJK brackets, fullwidth forms.
  if (c >= 0x2000 && c <= 0x206F) return true;
  if (c >= 0x2E00 && c <= 0x2E7F) return true;
  if (c >= 0x3001 && c <= 0x3011) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return true;
  if (c >= 0xFF1A && c <= 0xFF20) return true;
  switch (c) {
    case 0x00A1:  // inverted exclamation
    case 0x00A7:  // section sign
    case 0x00AB:  // left guillemet
    case 0x00B6:  // pilcrow
    case 0x00B7:  // middle dot
    case 0x00BB:  // right guillemet
    case 0x00BF:  // inverted question mark
      return true;
    default:
      return false;
  }
}

bool is_space_codepoint(std::uint32_t c) {
  if (c < 0x80) return std::isspace(static_cast<unsigned char>(c)) != 0;
  return c == 0x00A0 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x3000;
}

}  // namespace

std::vector<std::uint32_t> utf8_decode(std::string_view s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 >> 5) == 0x6) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 >> 4) == 0xE) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 >> 3) == 0x1E) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      len = 1;
      cp = 0xFFFD;
    }
    if (len > 1) {
      if (i + len > s.size()) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
      bool ok = true;
      for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b >> 6) != 0x2) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (b & 0x3F);
      }
      if (!ok) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(std::span<const std::uint32_t> cps) {
  std::string out;
  out.reserve(cps.size());
  for (std::uint32_t c : cps) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_punctuation_token(std::string_view surface) {
  if (surface.empty()) return false;
  for (std::string_view esc : kPtbEscapes) {
    if (surface == esc) return true;
  }
  for (std::uint32_t c : utf8_decode(surface)) {
    if (!is_punct_codepoint(c)) return false;
  }
  return true;
}

std::vector<Token> tokenize(std::string_view raw) {
  std::vector<Token> out;
  const auto cps = utf8_decode(raw);

  std::vector<std::uint32_t> word;
  auto flush_word = [&]() {
    if (word.empty()) return;
    out.push_back(Token{utf8_encode(word), false});
    word.clear();
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space_codepoint(cps[i])) {
      flush_word();
      ++i;
      continue;
    }
    // Whole whitespace-delimited chunk first: PTB escapes stay intact.
    std::size_t chunk_end = i;
    while (chunk_end < cps.size() && !is_space_codepoint(cps[chunk_end])) {
      ++chunk_end;
    }
    const std::string chunk =
        utf8_encode(std::span(cps.data() + i, chunk_end - i));
    bool is_escape = false;
    for (std::string_view esc : kPtbEscapes) {
      if (chunk == esc) {
        is_escape = true;
        break;
      }
    }
    if (is_escape) {
      flush_word();
      out.push_back(Token{chunk, true});
      i = chunk_end;
      continue;
    }
    for (; i < chunk_end; ++i) {
      if (is_punct_codepoint(cps[i])) {
        flush_word();
        out.push_back(Token{utf8_encode(std::span(cps.data() + i, 1)), true});
      } else {
        word.push_back(cps[i]);
      }
    }
    flush_word();
  }
  flush_word();
  return out;
}

NormalizedSentence normalize_sentence(std::vector<Token> tokens,
                                      const NormalizationOptions& opts) {
  NormalizedSentence out;
  out.original_tokens = std::move(tokens);
  for (std::uint32_t p = 0; p < out.original_tokens.size(); ++p) {
    const Token& tok = out.original_tokens[p];
    if (opts.strip_punct && tok.is_punctuation) continue;
    std::string s = tok.surface;
    if (opts.lowercase) {
      for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (opts.stem) s = stem(s, opts.lang);
    out.normalized_tokens.push_back(std::move(s));
    out.index_map.push_back(p);
  }
  return out;
}

NormalizedSentence normalize_text(std::string_view raw,
                                  const NormalizationOptions& opts) {
  return normalize_sentence(tokenize(raw), opts);
}

}  // namespace seminfo
