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

#include <cmath>
#include <numbers>
#include <random>

#include "santlr/audio.hpp"
#include "santlr/phoneme.hpp"

namespace {

santlr::PcmBuffer noisy_tone(double seconds) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  santlr::PcmBuffer pcm{std::vector<float>(static_cast<std::size_t>(seconds * 16000)), 16000};
  for (std::size_t i = 0; i < pcm.samples.size(); ++i) {
    const double t = static_cast<double>(i) / 16000;
    const double gate = std::fmod(t, 2.0) < 1.2 ? 0.3 : 0.0;
    pcm.samples[i] = static_cast<float>(gate * std::sin(2 * std::numbers::pi * 440 * t) + noise(rng));
  }
  return pcm;
}

void BM_Features(benchmark::State& state) {
  const auto pcm = noisy_tone(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(santlr::extract_features(pcm));
}
BENCHMARK(BM_Features)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_VadSplit(benchmark::State& state) {
  const auto pcm = noisy_tone(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    const auto mask = santlr::detect_voice_activity(santlr::frame_energies(pcm));
    benchmark::DoNotOptimize(santlr::split_on_silence(pcm, mask));
  }
}
BENCHMARK(BM_VadSplit)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_FitCodebook(benchmark::State& state) {
  const std::vector<santlr::PcmBuffer> clips = {noisy_tone(20.0)};
  for (auto _ : state) {
    santlr::EstimatorSpec spec;
    santlr::fit_spectral_codebook(spec, clips);
    benchmark::DoNotOptimize(spec.codebook);
  }
}
BENCHMARK(BM_FitCodebook)->Unit(benchmark::kMillisecond);

}  // namespace
