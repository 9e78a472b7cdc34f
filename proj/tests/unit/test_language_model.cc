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

#include <cmath>
#include <random>

#include "doctest.h"
#include "santlr/errors.hpp"
#include "santlr/language_model.hpp"

using namespace santlr;

namespace {

using Lm = NgramLanguageModel;

std::uint64_t count_of(const Lm& lm, std::vector<std::string> words) {
  std::vector<TokenId> ids;
  for (const auto& w : words) {
    if (w == "<s>") ids.push_back(Lm::kBos);
    else if (w == "</s>") ids.push_back(Lm::kEos);
    else ids.push_back(lm.id(w));
  }
  return lm.count(ids);
}

}  // namespace

TEST_CASE("bigram counts") {
  const std::vector<TokenList> corpus = {{"a", "b"}};
  const auto lm = Lm::train(corpus, 2, 0.1);
  CHECK(count_of(lm, {"<s>", "a"}) == 1);
  CHECK(count_of(lm, {"a", "b"}) == 1);
  CHECK(count_of(lm, {"b", "</s>"}) == 1);
  CHECK(count_of(lm, {"a", "a"}) == 0);
  CHECK(count_of(lm, {"a"}) == 1);
  CHECK(count_of(lm, {"</s>"}) == 1);
  CHECK(count_of(lm, {"<s>"}) == 0);
  CHECK(lm.vocab_size() == 5);
  CHECK(lm.id("zzz") == Lm::kUnk);
}

TEST_CASE("duplicated corpus doubles counts but keeps probabilities") {
  const std::vector<TokenList> once = {{"a", "b"}};
  const std::vector<TokenList> twice = {{"a", "b"}, {"a", "b"}};
  const auto l1 = Lm::train(once, 2, 1e-12);
  const auto l2 = Lm::train(twice, 2, 1e-12);
  l1.for_each_ngram([&](std::span<const TokenId> g, std::uint64_t c) {
    CHECK(l2.count(g) == 2 * c);
  });
  const std::vector<TokenId> h = {l1.id("a")};
  CHECK(l1.log_prob(h, l1.id("b")) == doctest::Approx(l2.log_prob(h, l2.id("b"))));
}

TEST_CASE("unigram total equals tokens plus sentences") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(1, 12), word(0, 30);
  std::vector<TokenList> corpus;
  std::uint64_t tokens = 0;
  for (int i = 0; i < 100; ++i) {
    TokenList s;
    for (int k = len(rng); k > 0; --k) s.push_back("w" + std::to_string(word(rng)));
    tokens += s.size();
    corpus.push_back(std::move(s));
  }
  const auto lm = Lm::train(corpus, 3, 0.1);
  std::uint64_t uni = 0;
  lm.for_each_ngram([&](std::span<const TokenId> g, std::uint64_t c) {
    if (g.size() == 1) uni += c;
    if (g.size() > 1 && g.front() != Lm::kBos) CHECK(c <= lm.count(g.first(g.size() - 1)));
  });
  CHECK(uni == tokens + 100);
  CHECK(lm.context_count({}) == uni);
}

TEST_CASE("perplexity examples") {
  const std::vector<TokenList> one = {{"the", "cat", "sat"}};
  const auto lm = Lm::train(one, 2, 1e-12);
  const TokenList s = {"the", "cat", "sat"};
  CHECK(std::abs(sentence_perplexity(lm, s) - 1.0) < 1e-9);

  const std::vector<TokenList> ab = {{"a", "a", "a", "a"}, {"b"}};
  const auto uni = Lm::train(ab, 1, 0.1);
  const TokenList aa = {"a", "a"}, bb = {"b", "b"};
  CHECK(sentence_perplexity(uni, aa) < sentence_perplexity(uni, bb));
  CHECK(sentence_perplexity(uni, aa) >= 1.0);
  const TokenList unseen = {"q", "r"};
  CHECK(sentence_perplexity(uni, unseen) >= 1.0);
}

TEST_CASE("smaller smoothing does not raise in-corpus perplexity") {
  const std::vector<TokenList> corpus = {{"a", "b", "c"}, {"a", "c", "b"}, {"b", "a"}};
  const auto hi = Lm::train(corpus, 3, 0.5);
  const auto lo = Lm::train(corpus, 3, 0.01);
  double sum_hi = 0, sum_lo = 0;
  for (const auto& s : corpus) {
    sum_hi += sentence_perplexity(hi, s);
    sum_lo += sentence_perplexity(lo, s);
  }
  CHECK(sum_lo <= sum_hi);
}

TEST_CASE("language model errors") {
  const std::vector<TokenList> empty = {{}, {}};
  try {
    Lm::train(empty, 2, 0.1);
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyCorpus);
  }
  const std::vector<TokenList> c = {{"a"}};
  const auto lm = Lm::train(c, 2, 0.1);
  try {
    sentence_perplexity(lm, TokenList{});
    FAIL("expected EmptySentence");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptySentence);
  }
}
