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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "santlr/errors.hpp"
#include "santlr/levenshtein.hpp"
#include "santlr/ranking.hpp"

using namespace santlr;

namespace {

AudioClipRef clip(std::string id, double dur, double snr) {
  AudioClipRef c;
  c.clip_id = std::move(id);
  c.duration_s = dur;
  c.end_s = dur;
  c.sample_rate_hz = 16000;
  c.snr_db = snr;
  return c;
}

PhonemeSequence seq(const std::string& id, std::vector<Symbol> s) {
  return PhonemeSequence{id, std::move(s)};
}

std::vector<std::string> ids(const RankedQueue& q) {
  std::vector<std::string> out;
  for (const auto& e : q.entries) out.push_back(e.id);
  return out;
}

TextItem item(std::string id, std::vector<std::string> tokens) {
  TextItem t;
  t.text_id = std::move(id);
  for (const auto& tok : tokens) t.sentence += (t.sentence.empty() ? "" : " ") + tok;
  t.tokens = std::move(tokens);
  return t;
}

}  // namespace

TEST_CASE("levenshtein kernel") {
  const std::string a = "kitten", b = "sitting";
  CHECK(levenshtein(std::span<const char>(a), std::span<const char>(b)) == 3);
  CHECK(levenshtein(std::span<const char>(b), std::span<const char>(a)) == 3);
  const std::string e;
  CHECK(levenshtein(std::span<const char>(e), std::span<const char>(b)) == 7);
  CHECK(levenshtein_bounded(std::span<const char>(a), std::span<const char>(b), 3) == 3);
  CHECK(levenshtein_bounded(std::span<const char>(a), std::span<const char>(b), 2) == 3);
  CHECK(levenshtein_bounded(std::span<const char>(a), std::span<const char>(b), 0) == 1);
}

TEST_CASE("similarity examples") {
  CHECK(phoneme_similarity(seq("a", {1, 2, 3}), seq("b", {1, 2, 3})) == 1.0);
  CHECK(phoneme_similarity(seq("a", {1, 2, 3}), seq("b", {4, 5, 6})) == 0.0);
  CHECK(phoneme_similarity(seq("a", {1, 2, 3}), seq("b", {1, 2})) ==
        doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(phoneme_similarity(seq("a", {}), seq("b", {1})), Error);
  const std::vector<std::string> x = {"a", "b", "c"}, y = {"x", "y", "z"};
  CHECK(text_similarity(x, x) == 1.0);
  CHECK(text_similarity(x, y) == 0.0);
  CHECK_THROWS_AS(text_similarity(x, std::vector<std::string>{}), Error);
}

TEST_CASE("audio ranking orders by duration") {
  const std::vector<AudioClipRef> clips = {clip("a", 10, 20), clip("b", 2, 20),
                                           clip("c", 5, 20)};
  const std::map<std::string, PhonemeSequence> ph = {
      {"a", seq("a", {1, 2, 3})}, {"b", seq("b", {4, 5, 6})}, {"c", seq("c", {7, 8, 9})}};
  const auto q = rank_audio(clips, ph, RankingConfig{});
  CHECK(ids(q) == std::vector<std::string>{"b", "c", "a"});
  CHECK(q.entries[0].input_index == 1);
  CHECK(q.entries[2].scores.base_score == 1.0);
  CHECK(q.entries[1].scores.base_score == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("audio ranking penalizes low snr") {
  const std::vector<AudioClipRef> clips = {clip("noisy", 2, 0), clip("clean", 2, 20)};
  const std::map<std::string, PhonemeSequence> ph = {{"noisy", seq("noisy", {1})},
                                                     {"clean", seq("clean", {2})}};
  const auto q = rank_audio(clips, ph, RankingConfig{});
  CHECK(ids(q) == std::vector<std::string>{"clean", "noisy"});
  CHECK(q.entries[0].scores.final_score == 0.0);
  CHECK(q.entries[1].scores.final_score == 0.5);
  CHECK(q.entries[1].scores.snr_penalty == 1.0);
}

TEST_CASE("audio ranking sinks duplicates") {
  const std::vector<AudioClipRef> clips = {clip("A", 2, 20), clip("B", 2, 20),
                                           clip("C", 2, 20)};
  const std::map<std::string, PhonemeSequence> ph = {
      {"A", seq("A", {1, 2, 3, 4})}, {"B", seq("B", {1, 2, 3, 4})}, {"C", seq("C", {5, 6, 7, 8})}};
  const auto q = rank_audio(clips, ph, RankingConfig{});
  CHECK(ids(q) == std::vector<std::string>{"A", "C", "B"});
  CHECK(q.entries[0].scores.final_score == 0.0);
  CHECK(q.entries[1].scores.final_score == 0.0);
  CHECK(q.entries[2].scores.final_score == 1.0);
  CHECK(q.entries[2].scores.overlap_penalty == 1.0);
}

TEST_CASE("audio ranking errors") {
  const std::map<std::string, PhonemeSequence> ph = {{"a", seq("a", {1})}};
  CHECK_THROWS_AS(rank_audio(std::vector<AudioClipRef>{}, ph, RankingConfig{}), Error);
  try {
    rank_audio(std::vector<AudioClipRef>{clip("zz", 1, 20)}, ph, RankingConfig{});
    FAIL("expected MissingPhonemes");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingPhonemes);
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
  }
  auto c = clip("a", 1, 20);
  c.snr_db.reset();
  CHECK_THROWS_AS(rank_audio(std::vector<AudioClipRef>{c}, ph, RankingConfig{}), Error);
}

TEST_CASE("audio ranking is stable and a permutation") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> sym(0, 3), len(1, 6);
  std::vector<AudioClipRef> clips;
  std::map<std::string, PhonemeSequence> ph;
  for (int i = 0; i < 60; ++i) {
    const std::string id = "c" + std::to_string(i);
    clips.push_back(clip(id, 3.0, 25.0));
    std::vector<Symbol> s;
    for (int k = len(rng); k > 0; --k) s.push_back(static_cast<Symbol>(sym(rng)));
    ph[id] = PhonemeSequence::collapsed(id, s);
  }
  RankingConfig cfg;
  cfg.w_overlap = 0.0;
  const auto q = rank_audio(clips, ph, cfg);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(q.entries[i].input_index == i);
  cfg.w_overlap = 1.0;
  const auto q2 = rank_audio(clips, ph, cfg);
  const auto got = ids(q2);
  CHECK(std::set<std::string>(got.begin(), got.end()).size() == clips.size());
  for (std::size_t i = 1; i < q2.size(); ++i) {
    const auto& p = q2.entries[i - 1];
    const auto& c = q2.entries[i];
    CHECK((p.scores.final_score < c.scores.final_score ||
           (p.scores.final_score == c.scores.final_score && p.input_index < c.input_index)));
  }
}

TEST_CASE("audio ranking monotone in duration and snr") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dur(0.5, 12.0), snr(-5.0, 40.0);
  std::uniform_int_distribution<int> sym(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AudioClipRef> clips;
    std::map<std::string, PhonemeSequence> ph;
    for (int i = 0; i < 6; ++i) {
      const std::string id = "c" + std::to_string(i);
      clips.push_back(clip(id, dur(rng), snr(rng)));
      std::vector<Symbol> s;
      for (int k = 0; k < 5; ++k) s.push_back(static_cast<Symbol>(sym(rng)));
      ph[id] = PhonemeSequence::collapsed(id, s);
    }
    RankingConfig cfg;
    cfg.w_overlap = 0.0;
    auto score_of = [&](const std::vector<AudioClipRef>& cs) {
      for (const auto& e : rank_audio(cs, ph, cfg).entries) {
        if (e.id == "c0") return e.scores.final_score;
      }
      return -1.0;
    };
    const double before = score_of(clips);
    auto longer = clips;
    longer[0].duration_s += 1.0;
    CHECK(score_of(longer) >= before);
    auto noisier = clips;
    *noisier[0].snr_db -= 3.0;
    CHECK(score_of(noisier) >= before);
  }
}

TEST_CASE("text ranking") {
  std::vector<TextItem> s = {item("t0", {"the", "cat", "sat"}),
                             item("t1", {"the", "cat", "sat"}),
                             item("t2", {"the", "cat", "sat"})};
  auto q = rank_text(s, RankingConfig{});
  CHECK(ids(q) == std::vector<std::string>{"t0", "t1", "t2"});
  CHECK(q.entries[0].scores.overlap_penalty == 0.0);
  CHECK(q.entries[1].scores.overlap_penalty == 1.0);
  CHECK(q.entries[2].scores.overlap_penalty == 1.0);

  // Frequent words beat hapax words.
  std::vector<TextItem> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back(item("f" + std::to_string(i), {"the", "a", "of"}));
  corpus.push_back(item("R", {"zygote", "quixotic", "phlegm"}));
  corpus.push_back(item("F", {"the", "a", "of"}));
  RankingConfig cfg;
  cfg.w_overlap = 0.0;
  q = rank_text(corpus, cfg);
  const auto order = ids(q);
  CHECK(std::find(order.begin(), order.end(), "F") < std::find(order.begin(), order.end(), "R"));
  CHECK(order.back() == "R");
  CHECK_THROWS_AS(rank_text(std::vector<TextItem>{}, cfg), Error);
}

TEST_CASE("text ranking never penalizes length") {
  std::vector<TextItem> s = {item("long", {"a", "b", "a", "b", "a", "b", "a", "b"}),
                             item("short", {"a", "b"})};
  RankingConfig cfg;
  cfg.w_overlap = 0.0;
  for (const auto& e : rank_text(s, cfg).entries) {
    CHECK(e.scores.final_score == e.scores.base_score);
    CHECK(e.scores.snr_penalty == 0.0);
  }
}
