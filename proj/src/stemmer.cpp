#include <algorithm>
#include <cstdint>
#include <iostream>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seminfo/textnorm.hpp"

namespace seminfo {

namespace {

using Word = std::vector<std::uint32_t>;

bool is_vowel(std::uint32_t c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// English Snowball (Porter2) stemmer, transcribed from the published
// algorithm. Operates on codepoints; non-ASCII letters count as consonants.
// Region marks p1/p2 are set once and, as in the reference implementation,
// are not shifted by later suffix replacements.
class Porter2 {
 public:
  explicit Porter2(Word w) : w_(std::move(w)) {}

  Word run() {
    if (exception1()) return w_;
    if (len() <= 2) return w_;
    prelude();
    mark_regions();
    step0();
    step1a();
    if (!exception2()) {
      step1b();
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    for (auto& c : w_) {
      if (c == 'Y') c = 'y';
    }
    return w_;
  }

 private:
  Word w_;
  std::size_t p1_ = 0;
  std::size_t p2_ = 0;

  std::size_t len() const { return w_.size(); }

  bool ends(std::string_view suf) const {
    if (suf.size() > w_.size()) return false;
    const std::size_t off = w_.size() - suf.size();
    for (std::size_t k = 0; k < suf.size(); ++k) {
      if (w_[off + k] != static_cast<unsigned char>(suf[k])) return false;
    }
    return true;
  }

  bool equals(std::string_view s) const {
    return s.size() == w_.size() && ends(s);
  }

  bool starts(std::string_view pre) const {
    if (pre.size() > w_.size()) return false;
    for (std::size_t k = 0; k < pre.size(); ++k) {
      if (w_[k] != static_cast<unsigned char>(pre[k])) return false;
    }
    return true;
  }

  void assign(std::string_view s) {
    w_.assign(s.begin(), s.end());
  }

  void chop(std::size_t k) { w_.resize(w_.size() - k); }

  void append(std::string_view s) {
    for (char c : s) w_.push_back(static_cast<unsigned char>(c));
  }

  void replace(std::size_t k, std::string_view s) {
    chop(k);
    append(s);
  }

  // A suffix of the given length lies in R1/R2 iff it starts at or after the
  // region mark.
  bool in_r1(std::size_t suffix_len) const { return len() - suffix_len >= p1_; }
  bool in_r2(std::size_t suffix_len) const { return len() - suffix_len >= p2_; }

  bool has_vowel_before(std::size_t end) const {
    for (std::size_t k = 0; k < end; ++k) {
      if (is_vowel(w_[k])) return true;
    }
    return false;
  }

  bool double_ending() const {
    if (len() < 2) return false;
    const std::uint32_t c = w_[len() - 1];
    if (c != w_[len() - 2]) return false;
    return c == 'b' || c == 'd' || c == 'f' || c == 'g' || c == 'm' ||
           c == 'n' || c == 'p' || c == 'r' || c == 't';
  }

  // Short syllable ending exactly at position `end` (exclusive).
  bool short_syllable_at(std::size_t end) const {
    if (end == 2 && is_vowel(w_[0]) && !is_vowel(w_[1])) return true;
    if (end >= 3) {
      const std::uint32_t c2 = w_[end - 1];
      const std::uint32_t v = w_[end - 2];
      const std::uint32_t c1 = w_[end - 3];
      if (!is_vowel(c1) && is_vowel(v) && !is_vowel(c2) && c2 != 'w' &&
          c2 != 'x' && c2 != 'Y') {
        return true;
      }
    }
    return false;
  }

  bool exception1() {
    static constexpr std::pair<std::string_view, std::string_view> kMap[] = {
        {"skis", "ski"},     {"skies", "sky"},   {"dying", "die"},
        {"lying", "lie"},    {"tying", "tie"},   {"idly", "idl"},
        {"gently", "gentl"}, {"ugly", "ugli"},   {"early", "earli"},
        {"only", "onli"},    {"singly", "singl"}};
    static constexpr std::string_view kInvariant[] = {
        "sky", "news", "howe", "atlas", "cosmos", "bias", "andes"};
    for (const auto& [from, to] : kMap) {
      if (equals(from)) {
        assign(to);
        return true;
      }
    }
    for (std::string_view inv : kInvariant) {
      if (equals(inv)) return true;
    }
    return false;
  }

  bool exception2() const {
    static constexpr std::string_view kStop[] = {
        "inning", "outing", "canning", "herring",
        "earring", "proceed", "exceed",  "succeed"};
    for (std::string_view s : kStop) {
      if (equals(s)) return true;
    }
    return false;
  }

  void prelude() {
    if (!w_.empty() && w_[0] == '\'') w_.erase(w_.begin());
    if (!w_.empty() && w_[0] == 'y') w_[0] = 'Y';
    for (std::size_t k = 1; k < len(); ++k) {
      if (w_[k] == 'y' && is_vowel(w_[k - 1])) w_[k] = 'Y';
    }
  }

  void mark_regions() {
    p1_ = p2_ = len();
    std::size_t c = 0;
    bool prefixed = false;
    for (std::string_view pre : {"gener", "commun", "arsen"}) {
      if (starts(pre)) {
        c = pre.size();
        prefixed = true;
        break;
      }
    }
    if (!prefixed) {
      if (!gopast_vowel_nonvowel(c)) return;
    }
    p1_ = c;
    if (!gopast_vowel_nonvowel(c)) return;
    p2_ = c;
  }

  // Advances c past the next vowel then past the next non-vowel.
  bool gopast_vowel_nonvowel(std::size_t& c) const {
    while (c < len() && !is_vowel(w_[c])) ++c;
    if (c >= len()) return false;
    ++c;
    while (c < len() && is_vowel(w_[c])) ++c;
    if (c >= len()) return false;
    ++c;
    return true;
  }

  void step0() {
    if (ends("'s'")) {
      chop(3);
    } else if (ends("'s")) {
      chop(2);
    } else if (ends("'")) {
      chop(1);
    }
  }

  void step1a() {
    if (ends("sses")) {
      replace(4, "ss");
      return;
    }
    if (ends("ied") || ends("ies")) {
      if (len() > 4) {
        replace(3, "i");
      } else {
        replace(3, "ie");
      }
      return;
    }
    if (ends("us") || ends("ss")) return;
    if (ends("s")) {
      // Delete if some vowel precedes the letter before the s.
      if (len() >= 2 && has_vowel_before(len() - 2)) chop(1);
    }
  }

  void step1b() {
    if (ends("eedly")) {
      if (in_r1(5)) replace(5, "ee");
      return;
    }
    if (ends("eed")) {
      if (in_r1(3)) replace(3, "ee");
      return;
    }
    std::size_t suf = 0;
    if (ends("ingly")) {
      suf = 5;
    } else if (ends("edly")) {
      suf = 4;
    } else if (ends("ing")) {
      suf = 3;
    } else if (ends("ed")) {
      suf = 2;
    } else {
      return;
    }
    if (!has_vowel_before(len() - suf)) return;
    chop(suf);
    if (ends("at") || ends("bl") || ends("iz")) {
      append("e");
      return;
    }
    if (double_ending()) {
      chop(1);
      return;
    }
    if (p1_ >= len() && short_syllable_at(len())) append("e");
  }

  void step1c() {
    if (len() < 3) return;
    const std::uint32_t c = w_[len() - 1];
    if ((c == 'y' || c == 'Y') && !is_vowel(w_[len() - 2])) {
      w_[len() - 1] = 'i';
    }
  }

  void step2() {
    struct Rule {
      std::string_view suf;
      std::string_view rep;
    };
    // Ordered longest-first: the matched suffix is the longest one, and a
    // failed region test ends the step without trying shorter suffixes.
    static constexpr Rule kRules[] = {
        {"ational", "ate"},  {"ization", "ize"}, {"fulness", "ful"},
        {"ousness", "ous"},  {"iveness", "ive"}, {"tional", "tion"},
        {"biliti", "ble"},   {"lessli", "less"}, {"entli", "ent"},
        {"ation", "ate"},    {"alism", "al"},    {"aliti", "al"},
        {"ousli", "ous"},    {"iviti", "ive"},   {"fulli", "ful"},
        {"enci", "ence"},    {"anci", "ance"},   {"abli", "able"},
        {"izer", "ize"},     {"ator", "ate"},    {"alli", "al"},
        {"bli", "ble"},      {"ogi", "og"},      {"li", ""}};
    for (const Rule& r : kRules) {
      if (!ends(r.suf)) continue;
      if (!in_r1(r.suf.size())) return;
      if (r.suf == "ogi") {
        if (len() >= 4 && w_[len() - 4] == 'l') replace(3, "og");
        return;
      }
      if (r.suf == "li") {
        if (len() >= 3 && is_valid_li(w_[len() - 3])) chop(2);
        return;
      }
      replace(r.suf.size(), r.rep);
      return;
    }
  }

  static bool is_valid_li(std::uint32_t c) {
    return c == 'c' || c == 'd' || c == 'e' || c == 'g' || c == 'h' ||
           c == 'k' || c == 'm' || c == 'n' || c == 'r' || c == 't';
  }

  void step3() {
    struct Rule {
      std::string_view suf;
      std::string_view rep;
    };
    static constexpr Rule kRules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"alize", "al"},
        {"icate", "ic"},    {"iciti", "ic"},    {"ative", ""},
        {"ical", "ic"},     {"ness", ""},       {"ful", ""}};
    for (const Rule& r : kRules) {
      if (!ends(r.suf)) continue;
      if (!in_r1(r.suf.size())) return;
      if (r.suf == "ative") {
        if (in_r2(5)) chop(5);
        return;
      }
      replace(r.suf.size(), r.rep);
      return;
    }
  }

  void step4() {
    static constexpr std::string_view kSuffixes[] = {
        "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent",
        "ism",   "ate",  "iti",  "ous",  "ive",  "ize",  "ion", "al",
        "er",    "ic"};
    for (std::string_view suf : kSuffixes) {
      if (!ends(suf)) continue;
      if (!in_r2(suf.size())) return;
      if (suf == "ion") {
        const std::uint32_t before = len() >= 4 ? w_[len() - 4] : 0;
        if (before == 's' || before == 't') chop(3);
        return;
      }
      chop(suf.size());
      return;
    }
  }

  void step5() {
    if (ends("e")) {
      if (in_r2(1) || (in_r1(1) && !short_syllable_at(len() - 1))) chop(1);
      return;
    }
    if (ends("l")) {
      if (in_r2(1) && len() >= 2 && w_[len() - 2] == 'l') chop(1);
    }
  }
};

void warn_unknown_language_once(const std::string& lang) {
  static std::mutex mu;
  static std::set<std::string> warned;
  const std::lock_guard<std::mutex> lock(mu);
  if (warned.insert(lang).second) {
    std::cerr << "[textnorm] no stemmer for language '" << lang
              << "'; using identity stemming\n";
  }
}

bool known_identity_language(const std::string& lang) {
  static constexpr std::string_view kKnown[] = {
      "de", "fr", "es", "it", "pt", "nl", "sv", "no", "da", "fi",
      "ru", "zh", "ja", "ko", "ar", "hi", "tr", "pl", "cs", "el"};
  return std::find(std::begin(kKnown), std::end(kKnown), lang) !=
         std::end(kKnown);
}

}  // namespace

std::string stem(std::string_view token, const std::string& lang) {
  if (lang == "en" || lang == "english") {
    Porter2 stemmer(utf8_decode(token));
    const Word out = stemmer.run();
    return utf8_encode(out);
  }
  if (!known_identity_language(lang)) warn_unknown_language_once(lang);
  return std::string(token);
}

}  // namespace seminfo
