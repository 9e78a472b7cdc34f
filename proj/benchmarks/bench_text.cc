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

#include "santlr/language_model.hpp"
#include "santlr/ranking.hpp"
#include "santlr/text.hpp"

namespace {

std::vector<santlr::TokenList> corpus(std::size_t n) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> word(0, 499), len(3, 20);
  std::vector<santlr::TokenList> out(n);
  for (auto& s : out) {
    for (int k = len(rng); k > 0; --k) s.push_back("w" + std::to_string(word(rng)));
  }
  return out;
}

void BM_TrainTrigram(benchmark::State& state) {
  const auto c = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(santlr::NgramLanguageModel::train(c, 3, 0.1));
  }
}
BENCHMARK(BM_TrainTrigram)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Perplexity(benchmark::State& state) {
  const auto c = corpus(1000);
  const auto lm = santlr::NgramLanguageModel::train(c, 3, 0.1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(santlr::sentence_perplexity(lm, c[i++ % c.size()]));
  }
}
BENCHMARK(BM_Perplexity);

void BM_RankText(benchmark::State& state) {
  const auto c = corpus(static_cast<std::size_t>(state.range(0)));
  std::vector<santlr::TextItem> items;
  for (std::size_t i = 0; i < c.size(); ++i) {
    santlr::TextItem t;
    t.text_id = "s" + std::to_string(i);
    t.tokens = c[i];
    items.push_back(std::move(t));
  }
  const santlr::RankingConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(santlr::rank_text(items, cfg));
}
BENCHMARK(BM_RankText)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_CleanText(benchmark::State& state) {
  std::string doc;
  for (int i = 0; i < 200; ++i) {
    doc += "<p>Sentence number " + std::to_string(i) + " &amp; more \xf0\x9f\x98\x80 text.</p>\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(santlr::clean_text(doc));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * doc.size()));
}
BENCHMARK(BM_CleanText);

}  // namespace
