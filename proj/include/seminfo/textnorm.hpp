#ifndef SEMINFO_TEXTNORM_HPP
#define SEMINFO_TEXTNORM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seminfo {

struct Token {
  std::string surface;
  bool is_punctuation = false;
  bool operator==(const Token&) const = default;
};

// A sentence after punctuation stripping, lowercasing, and stemming.
// index_map[k] is the original-token position of normalized token k.
struct NormalizedSentence {
  std::vector<Token> original_tokens;
  std::vector<std::string> normalized_tokens;
  std::vector<std::uint32_t> index_map;
};

struct NormalizationOptions {
  std::string lang = "en";
  bool strip_punct = true;
  bool lowercase = true;
  bool stem = true;
};

// Whitespace tokenization with punctuation characters split into standalone
// tokens. PTB bracket/quote escapes (-LRB-, -RRB-, ``, '', ...) are kept
// intact and flagged as punctuation.
std::vector<Token> tokenize(std::string_view raw);

// True for tokens consisting entirely of punctuation characters, and for the
// PTB escape tokens.
bool is_punctuation_token(std::string_view surface);

// Snowball (Porter2) stemming for English; identity for other languages.
// An unrecognized language id warns once on stderr and stems as identity.
std::string stem(std::string_view token, const std::string& lang = "en");

NormalizedSentence normalize_sentence(std::vector<Token> tokens,
                                      const NormalizationOptions& opts = {});

// Convenience: tokenize + normalize in one call.
NormalizedSentence normalize_text(std::string_view raw,
                                  const NormalizationOptions& opts = {});

// Minimal UTF-8 codec (invalid sequences decode to U+FFFD). The stemmer and
// tokenizer operate on codepoints so multi-byte letters count as one letter.
std::vector<std::uint32_t> utf8_decode(std::string_view s);
std::string utf8_encode(std::span<const std::uint32_t> cps);

}  // namespace seminfo

#endif  // SEMINFO_TEXTNORM_HPP
