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

#include "santlr/language_model.hpp"

#include <cmath>

#include "santlr/errors.hpp"

namespace santlr {

std::size_t NgramLanguageModel::KeyHash::operator()(
    const std::vector<TokenId>& key) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (TokenId t : key) {
    h ^= t;
    h *= 1099511628211ULL;
  }
  h ^= key.size();
  return static_cast<std::size_t>(h);
}

NgramLanguageModel NgramLanguageModel::train(
    std::span<const TokenList> sentences, int order, double add_k) {
  if (order < 1) throw Error(Errc::InvalidArgument, "order must be >= 1");
  if (!(add_k > 0.0)) throw Error(Errc::InvalidArgument, "add_k must be > 0");
  NgramLanguageModel lm;
  lm.order_ = order;
  lm.add_k_ = add_k;
  lm.names_ = {"<s>", "</s>", "<unk>"};

  std::size_t used = 0;
  std::vector<TokenId> padded;
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    ++used;
    padded.assign(static_cast<std::size_t>(order - 1), kBos);
    for (const auto& tok : sentence) {
      auto [it, inserted] =
          lm.ids_.try_emplace(tok, static_cast<TokenId>(lm.names_.size()));
      if (inserted) lm.names_.push_back(tok);
      padded.push_back(it->second);
    }
    padded.push_back(kEos);
    for (std::size_t end = static_cast<std::size_t>(order - 1);
         end < padded.size(); ++end) {
      for (int k = 1; k <= order; ++k) {
        const std::size_t begin = end + 1 - static_cast<std::size_t>(k);
        std::vector<TokenId> gram(padded.begin() + static_cast<std::ptrdiff_t>(begin),
                                  padded.begin() + static_cast<std::ptrdiff_t>(end) + 1);
        ++lm.counts_[gram];
        gram.pop_back();
        ++lm.context_counts_[gram];
      }
    }
  }
  if (used == 0) throw Error(Errc::EmptyCorpus, "no non-empty sentences");
  return lm;
}

TokenId NgramLanguageModel::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

std::uint64_t NgramLanguageModel::count(std::span<const TokenId> ngram) const {
  auto it = counts_.find(std::vector<TokenId>(ngram.begin(), ngram.end()));
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t NgramLanguageModel::context_count(
    std::span<const TokenId> history) const {
  auto it =
      context_counts_.find(std::vector<TokenId>(history.begin(), history.end()));
  return it == context_counts_.end() ? 0 : it->second;
}

double NgramLanguageModel::log_prob(std::span<const TokenId> history,
                                    TokenId word) const {
  while (!history.empty() && context_count(history) == 0) {
    history = history.subspan(1);
  }
  std::vector<TokenId> gram(history.begin(), history.end());
  gram.push_back(word);
  const double num = static_cast<double>(count(gram)) + add_k_;
  const double den = static_cast<double>(context_count(history)) +
                     add_k_ * static_cast<double>(vocab_size());
  return std::log(num / den);
}

void NgramLanguageModel::for_each_ngram(
    const std::function<void(std::span<const TokenId>, std::uint64_t)>& f)
    const {
  for (const auto& [gram, c] : counts_) f(gram, c);
}

double sentence_perplexity(const NgramLanguageModel& lm,
                           std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(Errc::EmptySentence, "no tokens to score");
  const auto hist_len = static_cast<std::size_t>(lm.order() - 1);
  std::vector<TokenId> history(hist_len, NgramLanguageModel::kBos);
  double total = 0.0;
  auto step = [&](TokenId w) {
    total += lm.log_prob(history, w);
    if (hist_len > 0) {
      history.erase(history.begin());
      history.push_back(w);
    }
  };
  for (const auto& tok : tokens) step(lm.id(tok));
  step(NgramLanguageModel::kEos);
  const double t = static_cast<double>(tokens.size() + 1);
  return std::exp(-total / t);
}

}  // namespace santlr
