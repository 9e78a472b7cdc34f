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

#include "santlr/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "santlr/errors.hpp"
#include "santlr/levenshtein.hpp"

namespace santlr {

namespace {

double similarity_from_distance(std::size_t distance, std::size_t la,
                                std::size_t lb) {
  const double longest = static_cast<double>(std::max(la, lb));
  return 1.0 - static_cast<double>(distance) / longest;
}

std::vector<double> min_max_normalize(const std::vector<double>& raw) {
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double range = *hi - *lo;
  std::vector<double> out(raw.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i] = (raw[i] - *lo) / range;
    }
  }
  return out;
}

std::vector<std::size_t> stable_order(const std::vector<double>& score) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score[a] < score[b];
  });
  return order;
}

// Greedy dedup in `order`. Each item's overlap is its maximum similarity to
// the items already visited; it becomes a penalty only at or above the
// threshold. Candidates are bucketed by length: a length pair whose ratio
// bound 1 - |la - lb| / max already falls below the threshold cannot reach
// it, and the edit distance itself stops once the threshold is out of reach.
// Both shortcuts leave the penalties unchanged.
template <typename T>
std::vector<double> greedy_overlap(const std::vector<std::span<const T>>& seqs,
                                   const std::vector<std::size_t>& order,
                                   double threshold) {
  std::vector<double> penalty(seqs.size(), 0.0);
  std::map<std::size_t, std::vector<std::size_t>> accepted_by_len;
  for (std::size_t idx : order) {
    const auto cand = seqs[idx];
    const std::size_t lc = cand.size();
    std::size_t lo_len = 0;
    std::size_t hi_len = std::numeric_limits<std::size_t>::max();
    if (threshold > 0.0) {
      lo_len = static_cast<std::size_t>(std::floor(threshold * lc));
      const double hi = std::ceil(static_cast<double>(lc) / threshold);
      if (hi < static_cast<double>(hi_len)) hi_len = static_cast<std::size_t>(hi);
    }
    double best = 0.0;
    for (auto it = accepted_by_len.lower_bound(lo_len);
         it != accepted_by_len.end() && it->first <= hi_len && best < 1.0;
         ++it) {
      const std::size_t la = it->first;
      const std::size_t longest = std::max(la, lc);
      const double bound = similarity_from_distance(
          la > lc ? la - lc : lc - la, la, lc);
      if (bound < threshold) continue;
      const auto limit = static_cast<std::size_t>(
                             std::floor((1.0 - threshold) * longest)) + 1;
      for (std::size_t other : it->second) {
        const std::size_t d = levenshtein_bounded(cand, seqs[other], limit);
        if (d > limit) continue;
        best = std::max(best, similarity_from_distance(d, la, lc));
        if (best >= 1.0) break;
      }
    }
    penalty[idx] = best >= threshold ? best : 0.0;
    accepted_by_len[lc].push_back(idx);
  }
  return penalty;
}

RankedQueue finalize(const std::vector<std::string>& ids,
                     std::vector<ScoreBreakdown> scores) {
  std::vector<double> finals(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) finals[i] = scores[i].final_score;
  RankedQueue q;
  for (std::size_t idx : stable_order(finals)) {
    q.entries.push_back(RankedEntry{ids[idx], idx, scores[idx]});
  }
  return q;
}

}  // namespace

double phoneme_similarity(const PhonemeSequence& a, const PhonemeSequence& b) {
  if (a.symbols.empty() || b.symbols.empty()) {
    throw Error(Errc::EmptySequence, "phoneme similarity of an empty sequence");
  }
  return similarity_from_distance(levenshtein(a.symbols, b.symbols),
                                  a.symbols.size(), b.symbols.size());
}

double text_similarity(std::span<const std::string> a,
                       std::span<const std::string> b) {
  if (a.empty() || b.empty()) {
    throw Error(Errc::EmptySequence, "text similarity of an empty token list");
  }
  return similarity_from_distance(levenshtein(a, b), a.size(), b.size());
}

RankedQueue rank_audio(std::span<const AudioClipRef> clips,
                       const std::map<std::string, PhonemeSequence>& phonemes,
                       const RankingConfig& cfg) {
  cfg.validate();
  if (clips.empty()) throw Error(Errc::EmptyBatch, "no clips to rank");
  const std::size_t n = clips.size();
  std::vector<std::string> ids(n);
  std::vector<double> durations(n);
  std::vector<std::span<const Symbol>> seqs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = clips[i];
    if (!(c.duration_s > 0.0)) {
      throw Error(Errc::InvalidArgument, "clip " + c.clip_id + " has duration <= 0");
    }
    if (!c.snr_db) {
      throw Error(Errc::InvalidArgument, "clip " + c.clip_id + " has no snr_db");
    }
    auto it = phonemes.find(c.clip_id);
    if (it == phonemes.end() || it->second.symbols.empty()) {
      throw Error(Errc::MissingPhonemes, c.clip_id);
    }
    ids[i] = c.clip_id;
    durations[i] = c.duration_s;
    seqs[i] = it->second.symbols;
  }

  const auto base = min_max_normalize(durations);
  std::vector<ScoreBreakdown> scores(n);
  std::vector<double> provisional(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = scores[i];
    s.base_raw = durations[i];
    s.base_score = base[i];
    s.snr_penalty = std::clamp(
        (cfg.snr_target_db - *clips[i].snr_db) / cfg.snr_target_db, 0.0, 1.0);
    provisional[i] = s.base_score + cfg.w_snr * s.snr_penalty;
  }
  const auto overlap =
      greedy_overlap(seqs, stable_order(provisional), cfg.overlap_threshold);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i].overlap_penalty = overlap[i];
    scores[i].final_score = provisional[i] + cfg.w_overlap * overlap[i];
  }
  return finalize(ids, std::move(scores));
}

RankedQueue rank_text(std::span<const TextItem> sentences,
                      const RankingConfig& cfg) {
  cfg.validate();
  if (sentences.empty()) throw Error(Errc::EmptyBatch, "no sentences to rank");
  const std::size_t n = sentences.size();
  std::vector<TokenList> corpus;
  corpus.reserve(n);
  for (const auto& s : sentences) corpus.push_back(s.tokens);
  const auto lm = NgramLanguageModel::train(corpus, cfg.lm_order, cfg.lm_add_k);

  std::vector<std::string> ids(n);
  std::vector<double> ppl(n);
  std::vector<std::span<const std::string>> seqs(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = sentences[i].text_id;
    ppl[i] = sentence_perplexity(lm, sentences[i].tokens);
    seqs[i] = sentences[i].tokens;
  }
  const auto base = min_max_normalize(ppl);
  std::vector<ScoreBreakdown> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i].base_raw = ppl[i];
    scores[i].base_score = base[i];
  }
  const auto overlap =
      greedy_overlap(seqs, stable_order(base), cfg.text_dup_threshold);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i].overlap_penalty = overlap[i];
    scores[i].final_score = base[i] + cfg.w_overlap * overlap[i];
  }
  return finalize(ids, std::move(scores));
}

}  // namespace santlr
