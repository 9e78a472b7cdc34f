// Copyright 2026 The santlr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "doctest.h"
#include "santlr/text.hpp"

using namespace santlr;

TEST_CASE("invalid UTF-8 becomes U+FFFD") {
  CHECK(sanitize_utf8("ok") == "ok");
  CHECK(sanitize_utf8("a\xff" "b") == "a\xEF\xBF\xBD" "b");
  CHECK(sanitize_utf8("\xC3") == "\xEF\xBF\xBD");
  CHECK(sanitize_utf8("caf\xC3\xA9") == "caf\xC3\xA9");
  const RawDocument d = ingest_document("d1", "x\x80y", "in.txt");
  CHECK(d.bytes == "x\xEF\xBF\xBDy");
  CHECK(d.source_name == "in.txt");
}

TEST_CASE("markup removal") {
  CHECK(strip_markup("Hello <b>world</b>!") == "Hello world!");
  CHECK(strip_markup("a<script>var x = 1 < 2;</script>b") == "ab");
  CHECK(strip_markup("<style>p{}</style>text") == "text");
  CHECK(strip_markup("x<!-- note -->y") == "xy");
  CHECK(strip_markup("fish &amp; chips") == "fish & chips");
  CHECK(strip_markup("&#3588;&#x0E01;") == "\xE0\xB8\x84\xE0\xB8\x81");
  CHECK(strip_markup("&lt;i&gt;no&lt;/i&gt;") == "no");
  CHECK(strip_markup("1 < 2 and 3 > 2") == "1 < 2 and 3 > 2");
  CHECK(strip_markup("a < b") == "a < b");
}

TEST_CASE("markup removal is idempotent") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> parts = {"<b>", "</b>", "&lt;", "&gt;", "&amp;", "x", " ",
                                          "<", ">", "&", "lt;", "<script>", "</script>"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (int i = 0; i < 12; ++i) s += parts[rng() % parts.size()];
    const std::string once = strip_markup(s);
    CHECK(strip_markup(once) == once);
  }
}

TEST_CASE("emoji removal") {
  CHECK(remove_emoji("hi \xF0\x9F\x98\x80 there") == "hi  there");
  // Family ZWJ sequence and a skin-tone modifier.
  CHECK(remove_emoji("a\xF0\x9F\x91\xA8\xE2\x80\x8D\xF0\x9F\x91\xA9\xE2\x80\x8D\xF0\x9F\x91\xA7" "b") == "ab");
  CHECK(remove_emoji("\xF0\x9F\x91\x8D\xF0\x9F\x8F\xBD") == "");
  // Flag (two regional indicators).
  CHECK(remove_emoji("\xF0\x9F\x87\xB9\xF0\x9F\x87\xAD!") == "!");
  // Digits and ordinary symbols survive.
  CHECK(remove_emoji("1 # 2") == "1 # 2");
  CHECK(remove_emoji("\xE0\xB8\xAA\xE0\xB8\xA7\xE0\xB8\xB1\xE0\xB8\xAA") ==
        "\xE0\xB8\xAA\xE0\xB8\xA7\xE0\xB8\xB1\xE0\xB8\xAA");
}

TEST_CASE("sentence segmentation") {
  CHECK(segment_sentences("One. Two! Three? Four") ==
        std::vector<std::string>{"One.", "Two!", "Three?", "Four"});
  CHECK(segment_sentences("Pi is 3.14 today.") == std::vector<std::string>{"Pi is 3.14 today."});
  CHECK(segment_sentences("line one\nline two\r\n\n") ==
        std::vector<std::string>{"line one", "line two"});
  CHECK(segment_sentences("   ").empty());
  // Devanagari danda.
  CHECK(segment_sentences("\xE0\xA4\x95\xE0\xA5\xA4 \xE0\xA4\x96").size() == 2);
}

TEST_CASE("tokenization folds case and trims punctuation") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("  \"quoted\"  -- ") == std::vector<std::string>{"quoted"});
  CHECK(tokenize("don't stop") == std::vector<std::string>{"don't", "stop"});
  CHECK(tokenize("STRASSE Straße") == std::vector<std::string>{"strasse", "strasse"});
  CHECK(tokenize("...").empty());
}

TEST_CASE("clean_text composes the steps") {
  CHECK(clean_text("<p>Hi \xF0\x9F\x98\x80</p>\xff") == "Hi \xEF\xBF\xBD");
}
