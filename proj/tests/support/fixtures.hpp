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

// Shared fixtures for the unit and acceptance suites.

#pragma once

#include <stdlib.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "santlr/audio.hpp"
#include "santlr/ingest.hpp"

namespace santlr::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string pattern =
        (fs::temp_directory_path() / "santlr-test-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline std::size_t samples_for(double seconds, int sr) {
  return static_cast<std::size_t>(std::llround(seconds * sr));
}

inline void append_silence(PcmBuffer& pcm, double seconds) {
  pcm.samples.resize(pcm.samples.size() + samples_for(seconds, pcm.sample_rate_hz), 0.0f);
}

inline void append_tone(PcmBuffer& pcm, double seconds, double freq_hz,
                        double amplitude) {
  const std::size_t n = samples_for(seconds, pcm.sample_rate_hz);
  const std::size_t start = pcm.samples.size();
  pcm.samples.resize(start + n);
  for (std::size_t i = 0; i < n; ++i) {
    pcm.samples[start + i] = static_cast<float>(
        amplitude * std::sin(2.0 * std::numbers::pi * freq_hz *
                             static_cast<double>(i) / pcm.sample_rate_hz));
  }
}

inline PcmBuffer silence_tone_silence(int sr, double lead, double tone,
                                      double tail, double freq = 1000.0,
                                      double amplitude = 0.5) {
  PcmBuffer pcm{{}, sr};
  append_silence(pcm, lead);
  append_tone(pcm, tone, freq, amplitude);
  append_silence(pcm, tail);
  return pcm;
}

// `count` tone bursts of `burst_s` separated by `gap_s` of digital silence,
// each burst at its own frequency.
inline PcmBuffer tone_bursts(std::size_t count, int sr = 16000,
                             double burst_s = 0.4, double gap_s = 0.8,
                             std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(200.0, 3000.0);
  PcmBuffer pcm{{}, sr};
  append_silence(pcm, gap_s);
  for (std::size_t i = 0; i < count; ++i) {
    append_tone(pcm, burst_s, freq(rng), 0.4);
    append_silence(pcm, gap_s);
  }
  return pcm;
}

inline UploadFile wav_upload(const std::string& name, const PcmBuffer& pcm) {
  return {name, encode_wav(pcm)};
}

// Reference O(nm) full-matrix edit distance.
template <typename Seq>
std::size_t classic_levenshtein(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
    }
  }
  return d[n][m];
}

inline std::string random_word(std::mt19937_64& rng, std::size_t max_len,
                               const std::string& alphabet = "abcdefgh") {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = alphabet[ch(rng)];
  return s;
}

inline UploadFile text_upload(const std::string& name,
                              const std::vector<std::string>& sentences) {
  UploadFile f{name, {}};
  for (const auto& s : sentences) f.bytes += s + "\n";
  return f;
}

inline AnnotationRecord transcript(const std::string& utterance,
                                   const std::string& annotator,
                                   std::uint64_t revision, std::string text,
                                   bool final, Timestamp at = now_utc()) {
  AnnotationRecord r;
  r.utterance_id = UtteranceId(utterance);
  r.annotator_id = AnnotatorId(annotator);
  r.content = TranscriptText{std::move(text)};
  r.revision = revision;
  r.saved_at = at;
  r.final = final;
  return r;
}

// Random printable text that also exercises the TSV escapes and non-ASCII.
inline std::string random_transcript(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "a", "b", "z", " ", "\t", "\n", "\r", "\\", "\\t", "\xc3\xa9",
      "\xe0\xb8\x81", "\xe4\xb8\xad", "\"", ",", "x y"};
  std::uniform_int_distribution<std::size_t> len(1, 24), pick(0, pieces.size() - 1);
  std::string s;
  for (std::size_t n = len(rng); n > 0; --n) s += pieces[pick(rng)];
  return s;
}

}  // namespace santlr::testing
