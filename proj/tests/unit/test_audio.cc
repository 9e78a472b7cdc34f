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
#include "fixtures.hpp"
#include "santlr/audio.hpp"
#include "santlr/errors.hpp"

using namespace santlr;
using namespace santlr::testing;

namespace {

Errc decode_error(const std::string& bytes) {
  try {
    decode_audio(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decode unexpectedly succeeded");
  return Errc::InvalidArgument;
}

void put16(std::string& s, std::size_t at, std::uint16_t v) {
  s[at] = static_cast<char>(v & 0xff);
  s[at + 1] = static_cast<char>(v >> 8);
}

}  // namespace

TEST_CASE("WAV round trip preserves samples to 16-bit precision") {
  PcmBuffer pcm{{0.0f, 0.5f, -0.5f, 0.999f, -1.0f}, 22050};
  const PcmBuffer back = decode_audio(encode_wav(pcm));
  CHECK(back.sample_rate_hz == 22050);
  REQUIRE(back.size() == pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    CHECK(std::abs(back.samples[i] - pcm.samples[i]) <= 1.0 / 32768);
  }
}

TEST_CASE("stereo is averaged to mono") {
  std::string wav = encode_wav(PcmBuffer{{0.25f, 0.75f}, 8000});
  // Reinterpret the two samples as one stereo frame.
  put16(wav, 22, 2);
  put16(wav, 32, 4);
  const PcmBuffer pcm = decode_audio(wav);
  REQUIRE(pcm.size() == 1);
  CHECK(pcm.samples[0] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("malformed WAV input is rejected with a specific code") {
  const std::string good = encode_wav(PcmBuffer{std::vector<float>(100, 0.1f), 16000});
  CHECK(decode_error("") == Errc::MalformedHeader);
  CHECK(decode_error("RIFX0000WAVE") == Errc::MalformedHeader);
  CHECK(decode_error(good.substr(0, good.size() - 10)) == Errc::TruncatedPayload);
  std::string not_pcm = good;
  put16(not_pcm, 20, 3);  // IEEE float tag
  CHECK(decode_error(not_pcm) == Errc::UnsupportedEncoding);
  std::string bits8 = good;
  put16(bits8, 34, 8);
  CHECK(decode_error(bits8) == Errc::UnsupportedEncoding);
  std::string many = good;
  put16(many, 22, 6);
  put16(many, 32, 12);
  CHECK(decode_error(many) == Errc::UnsupportedEncoding);
  const std::string empty = encode_wav(PcmBuffer{{}, 16000});
  CHECK(decode_error(empty) == Errc::MalformedHeader);
}

TEST_CASE("frame layout and energies") {
  const auto l = FrameLayout::make(16000, 16000, 25.0, 10.0);
  CHECK(l.frame_len == 400);
  CHECK(l.hop_len == 160);
  CHECK(l.num_frames == (16000 - 400) / 160 + 1);
  CHECK(FrameLayout::make(100, 16000, 25.0, 10.0).num_frames == 1);

  PcmBuffer silent{std::vector<float>(16000, 0.0f), 16000};
  for (double e : frame_energies(silent)) CHECK(e == kEnergyFloorDb);

  PcmBuffer tone{{}, 16000};
  append_tone(tone, 1.0, 1000.0, 1.0);
  for (double e : frame_energies(tone)) {
    CHECK(e == doctest::Approx(20 * std::log10(1 / std::sqrt(2.0))).epsilon(1e-3));
  }
}

TEST_CASE("percentile uses linear interpolation") {
  const std::vector<double> v = {4, 1, 3, 2};
  CHECK(percentile(v, 0) == 1);
  CHECK(percentile(v, 100) == 4);
  CHECK(percentile(v, 50) == doctest::Approx(2.5));
  CHECK(percentile(v, 10) == doctest::Approx(1.3));
}

TEST_CASE("VAD marks the tone and the hangover") {
  const PcmBuffer pcm = silence_tone_silence(16000, 0.5, 1.0, 0.5);
  const VadMask mask = detect_voice_activity(frame_energies(pcm));
  // Frames 48..149 overlap the tone; five hangover frames follow.
  for (std::size_t i = 0; i < mask.decisions.size(); ++i) {
    const bool expected = i >= 48 && i <= 154;
    CHECK_MESSAGE(mask.decisions[i] == expected, "frame " << i);
  }
}

TEST_CASE("split on silence pads, merges and drops") {
  const PcmBuffer pcm = silence_tone_silence(16000, 0.5, 1.0, 0.5);
  const VadMask mask = detect_voice_activity(frame_energies(pcm));
  const auto segs = split_on_silence(pcm, mask);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].speech_start_s() == doctest::Approx(0.48));
  CHECK(segs[0].speech_end_s() == doctest::Approx(1.55));
  CHECK(segs[0].start_s() == doctest::Approx(0.38));
  CHECK(segs[0].end_s() == doctest::Approx(1.65));

  // Two bursts 0.3 s apart merge; a burst shorter than min_segment is dropped.
  PcmBuffer b{{}, 16000};
  append_silence(b, 1.0);
  append_tone(b, 0.5, 500, 0.5);
  append_silence(b, 0.3);
  append_tone(b, 0.5, 700, 0.5);
  append_silence(b, 2.0);
  append_tone(b, 0.05, 700, 0.5);
  append_silence(b, 2.0);
  VadConfig cfg;
  cfg.min_segment_s = 0.5;
  const auto merged = split_on_silence(b, detect_voice_activity(frame_energies(b), cfg), cfg);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].speech_start_s() == doctest::Approx(0.98));
  CHECK(merged[0].duration_s() < 1.6);
}

TEST_CASE("shared silence is split at its midpoint") {
  PcmBuffer b{{}, 16000};
  append_silence(b, 1.0);
  append_tone(b, 1.0, 500, 0.5);
  append_silence(b, 0.6);
  append_tone(b, 1.0, 700, 0.5);
  append_silence(b, 1.0);
  const auto segs = split_on_silence(b, detect_voice_activity(frame_energies(b)));
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].end <= segs[1].begin);
  CHECK(segs[0].end_s() == doctest::Approx(segs[0].speech_end_s() + 0.1));
}

TEST_CASE("long speech is force-split into pieces no longer than the maximum") {
  const PcmBuffer pcm = silence_tone_silence(16000, 5.0, 40.0, 5.0);
  const auto segs = split_on_silence(pcm, detect_voice_activity(frame_energies(pcm)));
  REQUIRE(segs.size() == 3);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].duration_s() <= 15.0);
    if (i > 0) CHECK(segs[i].begin == segs[i - 1].end);
  }
}

TEST_CASE("VAD config validation") {
  VadConfig c;
  c.max_segment_s = 0.1;
  CHECK_THROWS_AS(c.validate(), Error);
  VadConfig d;
  d.hangover_frames = -1;
  CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("SNR of a constructed tone/noise fixture") {
  std::mt19937_64 rng(3);
  for (double target : {10.0, 20.0, 30.0}) {
    const double tone_amp = 0.1;
    const double noise_rms = tone_amp / std::sqrt(2.0) * std::pow(10.0, -target / 20.0);
    std::normal_distribution<double> noise(0.0, noise_rms);
    PcmBuffer pcm{{}, 16000};
    for (int k = 0; k < 4; ++k) {
      const std::size_t start = pcm.size();
      append_silence(pcm, 1.0);
      for (std::size_t i = start; i < pcm.size(); ++i) pcm.samples[i] = static_cast<float>(noise(rng));
      append_tone(pcm, 1.0, 440.0 * (k + 1), tone_amp);
    }
    const std::size_t start = pcm.size();
    append_silence(pcm, 1.0);
    for (std::size_t i = start; i < pcm.size(); ++i) pcm.samples[i] = static_cast<float>(noise(rng));
    const VadMask mask = detect_voice_activity(frame_energies(pcm));
    CHECK(estimate_snr(pcm, mask) == doctest::Approx(target).epsilon(0.05));
  }
}

TEST_CASE("SNR edge cases") {
  PcmBuffer silent{std::vector<float>(8000, 0.0f), 16000};
  VadMask none{25.0, 10.0, std::vector<bool>(FrameLayout::make(8000, 16000, 25, 10).num_frames, false)};
  CHECK(estimate_snr(silent, none) == kMinusInfDb);
  // Tone over digital silence saturates at the upper clamp.
  const PcmBuffer pcm = silence_tone_silence(16000, 0.5, 1.0, 0.5);
  CHECK(estimate_snr(pcm, detect_voice_activity(frame_energies(pcm))) == 60.0);
}

TEST_CASE("segment SNR uses the parent file's noise") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.001);
  PcmBuffer pcm{{}, 16000};
  append_silence(pcm, 1.0);
  append_tone(pcm, 1.0, 500, 0.2);
  append_silence(pcm, 1.0);
  append_tone(pcm, 1.0, 500, 0.02);
  append_silence(pcm, 1.0);
  for (auto& s : pcm.samples) s += static_cast<float>(noise(rng));
  const VadMask mask = detect_voice_activity(frame_energies(pcm));
  const auto segs = split_on_silence(pcm, mask);
  REQUIRE(segs.size() == 2);
  const double loud = estimate_segment_snr(pcm, mask, segs[0]);
  const double quiet = estimate_segment_snr(pcm, mask, segs[1]);
  CHECK(loud - quiet == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("slice bounds") {
  PcmBuffer pcm{std::vector<float>(100, 0.0f), 16000};
  CHECK(slice(pcm, AudioSegment{10, 20, 10, 20, 16000}).size() == 10);
  CHECK_THROWS_AS(slice(pcm, AudioSegment{10, 200, 10, 20, 16000}), Error);
}
