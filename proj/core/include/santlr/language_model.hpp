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

// Count-based n-gram language model with add-k smoothing and backoff by
// context truncation, used to score sentences by per-token perplexity.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace santlr {

using TokenList = std::vector<std::string>;
using TokenId = std::uint32_t;

class NgramLanguageModel {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;

  // Each sentence is padded with (order - 1) BOS and one EOS. Every k-gram
  // (1 <= k <= order) ending at a real token or EOS is counted; BOS itself is
  // never counted as a unigram. Empty sentences are ignored; Error
  // EmptyCorpus when nothing remains.
  static NgramLanguageModel train(std::span<const TokenList> sentences,
                                  int order, double add_k);

  int order() const noexcept { return order_; }
  double add_k() const noexcept { return add_k_; }
  // Distinct corpus tokens plus BOS, EOS and UNK.
  std::size_t vocab_size() const noexcept { return names_.size(); }
  const std::vector<std::string>& vocab() const noexcept { return names_; }

  // UNK for anything not seen in training.
  TokenId id(std::string_view token) const;

  std::uint64_t count(std::span<const TokenId> ngram) const;
  // Number of times `history` was followed by a counted token; for the empty
  // history this is the total unigram count.
  std::uint64_t context_count(std::span<const TokenId> history) const;

  // log P(word | history) with history truncated from the left until its
  // context count is non-zero. `history` holds at most order - 1 ids.
  double log_prob(std::span<const TokenId> history, TokenId word) const;

  // Visits every stored n-gram with its count.
  void for_each_ngram(
      const std::function<void(std::span<const TokenId>, std::uint64_t)>& f)
      const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const noexcept;
  };
  using CountMap =
      std::unordered_map<std::vector<TokenId>, std::uint64_t, KeyHash>;

  int order_ = 1;
  double add_k_ = 0.1;
  std::vector<std::string> names_;
  std::unordered_map<std::string, TokenId> ids_;
  CountMap counts_;
  CountMap context_counts_;
};

// exp(-(1/T) * sum log P) over the tokens plus EOS, T = tokens.size() + 1.
// Error EmptySentence for an empty token list.
double sentence_perplexity(const NgramLanguageModel& lm,
                           std::span<const std::string> tokens);

}  // namespace santlr
