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

// Cleanup of researcher-supplied text: UTF-8 repair, markup and emoji
// removal, sentence segmentation and tokenization. All functions are pure.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace santlr {

struct RawDocument {
  std::string doc_id;
  std::string bytes;  // valid UTF-8; invalid input sequences became U+FFFD
  std::string source_name;
};

// Replaces every ill-formed UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

RawDocument ingest_document(std::string doc_id, std::string_view bytes,
                            std::string source_name);

// Removes tags, comments, and script/style elements with their content, and
// decodes character entities. Iterated to a fixed point, so entity-encoded
// markup (&lt;b&gt;) is removed as well and the function is idempotent. A '<'
// with no later '>' is kept verbatim.
std::string strip_markup(std::string_view text);

// Removes maximal runs of emoji code points (Extended_Pictographic, emoji
// modifiers, regional indicators) together with the joiners, variation
// selectors, keycaps and tag characters that belong to those runs.
std::string remove_emoji(std::string_view text);

// sanitize_utf8 + strip_markup + remove_emoji.
std::string clean_text(std::string_view raw);

// Splits after . ! ? (and Devanagari danda, ideographic full stop, Arabic
// question mark) when followed by whitespace or end of text, and at line
// breaks. Segments are trimmed; empty ones are dropped.
std::vector<std::string> segment_sentences(std::string_view text);

// Unicode whitespace split, leading/trailing punctuation stripped, default
// case folding, empty tokens dropped.
std::vector<std::string> tokenize(std::string_view sentence);

}  // namespace santlr
