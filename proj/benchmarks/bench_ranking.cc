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

#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "santlr/levenshtein.hpp"
#include "santlr/ranking.hpp"

namespace {

std::vector<santlr::Symbol> random_symbols(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> sym(0, 31);
  std::vector<santlr::Symbol> s(n);
  for (auto& x : s) x = static_cast<santlr::Symbol>(sym(rng));
  return s;
}

void BM_EditDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_symbols(rng, n), b = random_symbols(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(santlr::levenshtein(a, b));
}
BENCHMARK(BM_EditDistance)->Arg(16)->Arg(64)->Arg(256);

void BM_EditDistanceBounded(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_symbols(rng, n), b = random_symbols(rng, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(santlr::levenshtein_bounded(
        std::span<const santlr::Symbol>(a), std::span<const santlr::Symbol>(b), n / 5 + 1));
  }
}
BENCHMARK(BM_EditDistanceBounded)->Arg(16)->Arg(64)->Arg(256);

void BM_RankAudio(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dur(0.3, 15.0), snr(-10.0, 50.0);
  std::uniform_int_distribution<std::size_t> len(5, 40);
  std::vector<santlr::AudioClipRef> clips;
  std::map<std::string, santlr::PhonemeSequence> ph;
  for (int i = 0; i < state.range(0); ++i) {
    santlr::AudioClipRef c;
    c.clip_id = "c" + std::to_string(i);
    c.duration_s = dur(rng);
    c.snr_db = snr(rng);
    ph[c.clip_id] = santlr::PhonemeSequence{c.clip_id, random_symbols(rng, len(rng))};
    clips.push_back(std::move(c));
  }
  const santlr::RankingConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(santlr::rank_audio(clips, ph, cfg));
}
BENCHMARK(BM_RankAudio)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
