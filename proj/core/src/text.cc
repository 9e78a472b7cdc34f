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

#include "santlr/text.hpp"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <utility>

namespace santlr {

namespace {

constexpr UChar32 kReplacement = 0xFFFD;

// Decodes UTF-8 into code points; ill-formed sequences become U+FFFD.
std::vector<UChar32> decode(std::string_view s) {
  std::vector<UChar32> cps;
  cps.reserve(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t n = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    cps.push_back(c < 0 ? kReplacement : c);
  }
  return cps;
}

void append_utf8(std::string& out, UChar32 c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(reinterpret_cast<const char*>(buf), static_cast<size_t>(len));
}

std::string encode(const std::vector<UChar32>& cps, size_t begin, size_t end) {
  std::string out;
  for (size_t i = begin; i < end; ++i) append_utf8(out, cps[i]);
  return out;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c); }

// ---- markup ---------------------------------------------------------------

struct NamedEntity {
  std::string_view name;
  UChar32 cp;
};

constexpr std::array<NamedEntity, 22> kEntities{{
    {"amp", '&'},       {"lt", '<'},         {"gt", '>'},
    {"quot", '"'},      {"apos", '\''},      {"nbsp", 0x00A0},
    {"copy", 0x00A9},   {"reg", 0x00AE},     {"trade", 0x2122},
    {"hellip", 0x2026}, {"mdash", 0x2014},   {"ndash", 0x2013},
    {"lsquo", 0x2018},  {"rsquo", 0x2019},   {"ldquo", 0x201C},
    {"rdquo", 0x201D},  {"laquo", 0x00AB},   {"raquo", 0x00BB},
    {"middot", 0x00B7}, {"deg", 0x00B0},     {"times", 0x00D7},
    {"shy", 0x00AD},
}};

bool ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

size_t find_ci(std::string_view hay, std::string_view needle, size_t from) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (size_t k = 0; k < needle.size(); ++k) {
      if (ascii_lower(hay[i + k]) != ascii_lower(needle[k])) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

// Parses an entity starting at s[i] == '&'. On success appends the decoded
// character and returns the index just past ';'.
size_t decode_entity(std::string_view s, size_t i, std::string& out) {
  const size_t semi = s.find(';', i + 1);
  if (semi == std::string_view::npos || semi - i > 12 || semi == i + 1) {
    return 0;
  }
  const std::string_view body = s.substr(i + 1, semi - i - 1);
  if (body.front() == '#') {
    std::string_view digits = body.substr(1);
    int base = 10;
    if (!digits.empty() && (digits.front() == 'x' || digits.front() == 'X')) {
      base = 16;
      digits.remove_prefix(1);
    }
    if (digits.empty()) return 0;
    uint32_t value = 0;
    for (char c : digits) {
      int d;
      if (c >= '0' && c <= '9') {
        d = c - '0';
      } else if (base == 16 && c >= 'a' && c <= 'f') {
        d = c - 'a' + 10;
      } else if (base == 16 && c >= 'A' && c <= 'F') {
        d = c - 'A' + 10;
      } else {
        return 0;
      }
      value = value * base + d;
      if (value > 0x10FFFF) value = 0x110000;  // saturate
    }
    UChar32 cp = static_cast<UChar32>(value);
    if (cp == 0 || cp > 0x10FFFF || U_IS_SURROGATE(cp)) cp = kReplacement;
    append_utf8(out, cp);
    return semi + 1;
  }
  for (const auto& e : kEntities) {
    if (e.name == body) {
      append_utf8(out, e.cp);
      return semi + 1;
    }
  }
  return 0;
}

std::string strip_markup_pass(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  const size_t n = s.size();
  while (i < n) {
    const char c = s[i];
    if (c == '<' && i + 1 < n) {
      if (s.substr(i, 4) == "<!--") {
        const size_t end = s.find("-->", i + 4);
        if (end != std::string_view::npos) {
          i = end + 3;
          continue;
        }
      }
      const char next = s[i + 1];
      if (ascii_alpha(next) || next == '/' || next == '!' || next == '?') {
        const size_t close = s.find('>', i + 1);
        if (close == std::string_view::npos) {
          out += c;
          ++i;
          continue;
        }
        // Tag name, lowercased; skip over raw-text elements entirely.
        size_t k = i + 1;
        std::string name;
        while (k < close && (ascii_alpha(s[k]) || std::isdigit(
                                                      static_cast<unsigned char>(s[k])))) {
          name += ascii_lower(s[k]);
          ++k;
        }
        const bool self_closing = close > i + 1 && s[close - 1] == '/';
        if ((name == "script" || name == "style") && !self_closing) {
          const size_t end_tag = find_ci(s, "</" + name, close + 1);
          if (end_tag == std::string_view::npos) {
            i = n;
          } else {
            const size_t end_close = s.find('>', end_tag);
            i = end_close == std::string_view::npos ? n : end_close + 1;
          }
          continue;
        }
        i = close + 1;
        continue;
      }
    } else if (c == '&') {
      const size_t after = decode_entity(s, i, out);
      if (after != 0) {
        i = after;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

// ---- emoji ----------------------------------------------------------------

bool is_emoji_core(UChar32 c) {
  return u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC) ||
         u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER) ||
         u_hasBinaryProperty(c, UCHAR_REGIONAL_INDICATOR);
}

bool is_emoji_component(UChar32 c) {
  return c == 0x200D || c == 0xFE0E || c == 0xFE0F || c == 0x20E3 ||
         (c >= 0xE0020 && c <= 0xE007F);
}

bool is_sentence_terminal(UChar32 c) {
  return c == '.' || c == '!' || c == '?' || c == 0x0964 || c == 0x3002 ||
         c == 0x061F;
}

bool is_line_break(UChar32 c) {
  return c == '\n' || c == '\r' || c == 0x2028 || c == 0x2029;
}

std::string trim(const std::vector<UChar32>& cps, size_t b, size_t e) {
  while (b < e && is_space(cps[b])) ++b;
  while (e > b && is_space(cps[e - 1])) --e;
  return encode(cps, b, e);
}

}  // namespace

std::string sanitize_utf8(std::string_view bytes) {
  const auto cps = decode(bytes);
  return encode(cps, 0, cps.size());
}

RawDocument ingest_document(std::string doc_id, std::string_view bytes,
                            std::string source_name) {
  return RawDocument{std::move(doc_id), sanitize_utf8(bytes),
                     std::move(source_name)};
}

std::string strip_markup(std::string_view text) {
  // Each pass that changes anything strictly shortens the string.
  std::string current(text);
  for (;;) {
    std::string next = strip_markup_pass(current);
    if (next == current) return next;
    current = std::move(next);
  }
}

std::string remove_emoji(std::string_view text) {
  const auto cps = decode(text);
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < cps.size()) {
    if (!is_emoji_core(cps[i]) && !is_emoji_component(cps[i])) {
      append_utf8(out, cps[i]);
      ++i;
      continue;
    }
    size_t j = i;
    bool has_core = false;
    while (j < cps.size() &&
           (is_emoji_core(cps[j]) || is_emoji_component(cps[j]))) {
      has_core = has_core || is_emoji_core(cps[j]);
      ++j;
    }
    if (!has_core) {
      for (size_t k = i; k < j; ++k) append_utf8(out, cps[k]);
    }
    i = j;
  }
  return out;
}

std::string clean_text(std::string_view raw) {
  return remove_emoji(strip_markup(sanitize_utf8(raw)));
}

std::vector<std::string> segment_sentences(std::string_view text) {
  const auto cps = decode(text);
  std::vector<std::string> out;
  size_t start = 0;
  auto flush = [&](size_t end) {
    std::string seg = trim(cps, start, end);
    if (!seg.empty()) out.push_back(std::move(seg));
  };
  for (size_t i = 0; i < cps.size(); ++i) {
    if (is_line_break(cps[i])) {
      flush(i);
      start = i + 1;
    } else if (is_sentence_terminal(cps[i]) &&
               (i + 1 == cps.size() || is_space(cps[i + 1]))) {
      flush(i + 1);
      start = i + 1;
    }
  }
  flush(cps.size());
  return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  const auto cps = decode(sentence);
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i])) ++i;
    size_t j = i;
    while (j < cps.size() && !is_space(cps[j])) ++j;
    size_t b = i, e = j;
    while (b < e && u_ispunct(cps[b])) ++b;
    while (e > b && u_ispunct(cps[e - 1])) --e;
    if (b < e) {
      icu::UnicodeString word;
      for (size_t k = b; k < e; ++k) word.append(cps[k]);
      word.foldCase(U_FOLD_CASE_DEFAULT);
      std::string folded;
      word.toUTF8String(folded);
      tokens.push_back(std::move(folded));
    }
    i = j;
  }
  return tokens;
}

}  // namespace santlr
