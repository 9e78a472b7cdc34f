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

// Multi-step utterance ranking.
//
// Audio: ascending duration (min-max normalized), plus an S/N penalty, then
// a greedy pass that penalizes each clip by its phoneme similarity to every
// clip ranked above it. Text: ascending per-token perplexity under an n-gram
// model trained on the batch, then the same greedy pass with token-level
// edit-distance similarity. Lower final_score means higher priority.

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "santlr/language_model.hpp"
#include "santlr/model.hpp"
#include "santlr/ranking_config.hpp"

namespace santlr {

struct RankedEntry {
  std::string id;
  std::size_t input_index = 0;  // ingestion order, the tie-breaker
  ScoreBreakdown scores;

  bool operator==(const RankedEntry&) const = default;
};

// Sorted by final_score ascending, ties by input_index.
struct RankedQueue {
  std::vector<RankedEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool operator==(const RankedQueue&) const = default;
};

// 1 - levenshtein / max(len). Error EmptySequence if either side is empty.
double phoneme_similarity(const PhonemeSequence& a, const PhonemeSequence& b);
double text_similarity(std::span<const std::string> a,
                       std::span<const std::string> b);

// Errors: EmptyBatch; MissingPhonemes naming the clip; InvalidArgument for a
// non-positive duration or unset snr_db.
RankedQueue rank_audio(std::span<const AudioClipRef> clips,
                       const std::map<std::string, PhonemeSequence>& phonemes,
                       const RankingConfig& cfg);

// Error EmptyBatch. Never penalizes sentence length.
RankedQueue rank_text(std::span<const TextItem> sentences,
                      const RankingConfig& cfg);

}  // namespace santlr
