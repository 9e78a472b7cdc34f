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

// WAV decoding, energy-based voice activity detection, silence splitting
// and S/N estimation.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace santlr {

inline constexpr double kMinusInfDb = -999.0;
inline constexpr double kEnergyFloorDb = -200.0;

struct PcmBuffer {
  std::vector<float> samples;  // mono, in [-1, 1]
  int sample_rate_hz = 0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

enum class AudioFormat { WavPcm16 };

// RIFF/WAVE 16-bit PCM, mono or stereo (averaged), any sample rate.
// Throws Error with MalformedHeader, UnsupportedEncoding or TruncatedPayload.
PcmBuffer decode_audio(std::string_view bytes,
                       AudioFormat format = AudioFormat::WavPcm16);

// Mono 16-bit PCM WAV; samples are rounded and clamped to int16.
std::string encode_wav(const PcmBuffer& pcm);

// Frame grid shared by energies, the VAD mask and the spectral features.
struct FrameLayout {
  std::size_t frame_len = 0;  // samples
  std::size_t hop_len = 0;    // samples
  std::size_t num_frames = 0;

  static FrameLayout make(std::size_t num_samples, int sample_rate_hz,
                          double frame_ms, double hop_ms);

  std::size_t frame_start(std::size_t i) const { return i * hop_len; }
};

// Per-frame RMS in dBFS, clamped at 20*log10(1e-10) = -200. Buffers shorter
// than one frame yield a single zero-padded frame.
std::vector<double> frame_energies(const PcmBuffer& pcm, double frame_ms = 25.0,
                                   double hop_ms = 10.0);

struct VadConfig {
  double noise_floor_percentile = 10.0;
  double threshold_db_over_floor = 6.0;
  double min_silence_s = 0.5;
  int hangover_frames = 5;
  double min_segment_s = 0.3;
  double max_segment_s = 15.0;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double context_pad_s = 0.1;

  void validate() const;
};

struct VadMask {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::vector<bool> decisions;  // true = speech

  std::size_t speech_frames() const;
};

// Linear-interpolated percentile (numpy "linear" convention), p in [0, 100].
double percentile(std::span<const double> values, double p);

// Frame is speech iff energy > percentile floor + threshold; each speech
// frame then extends speech over the next hangover_frames frames.
VadMask detect_voice_activity(std::span<const double> energies,
                              const VadConfig& cfg = {});

// Sample positions within the parent buffer. [speech_begin, speech_end) is
// the detected speech run before context padding; [begin, end) is the clip.
struct AudioSegment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t speech_begin = 0;
  std::size_t speech_end = 0;
  int sample_rate_hz = 0;

  double start_s() const { return static_cast<double>(begin) / sample_rate_hz; }
  double end_s() const { return static_cast<double>(end) / sample_rate_hz; }
  double duration_s() const { return end_s() - start_s(); }
  double speech_start_s() const {
    return static_cast<double>(speech_begin) / sample_rate_hz;
  }
  double speech_end_s() const {
    return static_cast<double>(speech_end) / sample_rate_hz;
  }
};

std::vector<AudioSegment> split_on_silence(const PcmBuffer& pcm,
                                           const VadMask& mask,
                                           const VadConfig& cfg = {});

PcmBuffer slice(const PcmBuffer& pcm, const AudioSegment& segment);

// 20*log10(rms(speech frames) / rms(non-speech frames)), clamped to
// [-40, 60]. kMinusInfDb when there is no speech at all.
double estimate_snr(const PcmBuffer& pcm, const VadMask& mask);

// Speech power from the speech frames inside `segment`, noise power from the
// non-speech frames of the whole parent buffer.
double estimate_segment_snr(const PcmBuffer& pcm, const VadMask& mask,
                            const AudioSegment& segment);

}  // namespace santlr
