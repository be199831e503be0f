#include <doctest.h>

#include <string>

#include "seminfo/textnorm.hpp"

namespace {
#include "stemmer_ref.inc"
}

TEST_CASE("english stemmer reproduces the frozen Snowball reference pairs") {
  std::size_t checked = 0;
  for (const auto& pair : kStemmerRef) {
    const std::string got = seminfo::stem(pair[0], "en");
    INFO("word: ", pair[0], " want: ", pair[1], " got: ", got);
    REQUIRE(got == pair[1]);
    ++checked;
  }
  CHECK(checked >= 700);
}

TEST_CASE("stemmer handles the documented anchor cases") {
  CHECK(seminfo::stem("a") == "a");
  CHECK(seminfo::stem("working") == "work");
  CHECK(seminfo::stem("theories") == "theori");
}

TEST_CASE("non-english languages stem as identity") {
  CHECK(seminfo::stem("arbeiten", "de") == "arbeiten");
  CHECK(seminfo::stem("working", "xx-unknown") == "working");  // warns once
  CHECK(seminfo::stem("working", "english") == "work");
}
