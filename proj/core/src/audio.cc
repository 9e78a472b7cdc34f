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

#include "santlr/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "santlr/errors.hpp"

namespace santlr {

namespace {

std::uint32_t read_u32(std::string_view b, std::size_t off) {
  const auto* p = reinterpret_cast<const unsigned char*>(b.data() + off);
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(std::string_view b, std::size_t off) {
  const auto* p = reinterpret_cast<const unsigned char*>(b.data() + off);
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_u16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

double rms_to_db(double rms) { return 20.0 * std::log10(std::max(rms, 1e-10)); }

// Mean square of frame i with zero padding past the end of the buffer.
double frame_power(const PcmBuffer& pcm, const FrameLayout& layout,
                   std::size_t i) {
  const std::size_t start = layout.frame_start(i);
  const std::size_t stop = std::min(start + layout.frame_len, pcm.size());
  double acc = 0.0;
  for (std::size_t k = start; k < stop; ++k) {
    const double s = pcm.samples[k];
    acc += s * s;
  }
  return acc / static_cast<double>(layout.frame_len);
}

FrameLayout layout_for(const PcmBuffer& pcm, const VadMask& mask) {
  const auto layout = FrameLayout::make(pcm.size(), pcm.sample_rate_hz,
                                        mask.frame_ms, mask.hop_ms);
  if (layout.num_frames != mask.decisions.size()) {
    throw Error(Errc::InvalidArgument,
                "VAD mask has " + std::to_string(mask.decisions.size()) +
                    " frames, buffer layout has " +
                    std::to_string(layout.num_frames));
  }
  return layout;
}

double snr_from_powers(double speech_power, double noise_power) {
  const double db = rms_to_db(std::sqrt(speech_power)) -
                    rms_to_db(std::sqrt(noise_power));
  return std::clamp(db, -40.0, 60.0);
}

// Force-split [begin, end) until every piece is at most max_len samples.
// The cut goes at the quietest frame centre inside the middle third; ties go
// to the centre nearest the point that yields ceil(L / max_len) equal pieces.
void force_split(std::size_t begin, std::size_t end, std::size_t max_len,
                 const FrameLayout& layout, const std::vector<double>& energy,
                 std::vector<std::pair<std::size_t, std::size_t>>& out) {
  const std::size_t len = end - begin;
  if (len <= max_len) {
    out.emplace_back(begin, end);
    return;
  }
  const std::size_t pieces = (len + max_len - 1) / max_len;
  const double target = static_cast<double>(begin) +
                        static_cast<double>(len) *
                            static_cast<double>(pieces / 2) /
                            static_cast<double>(pieces);
  const double lo = static_cast<double>(begin) + len / 3.0;
  const double hi = static_cast<double>(begin) + 2.0 * len / 3.0;

  constexpr double kTieDb = 1e-6;
  std::size_t best_cut = 0;
  double best_energy = 0.0;
  double best_dist = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < layout.num_frames; ++i) {
    const double center =
        static_cast<double>(layout.frame_start(i) + layout.frame_len / 2);
    if (center < lo) continue;
    if (center > hi) break;
    const double e = energy[i];
    const double dist = std::abs(center - target);
    if (!found || e < best_energy - kTieDb) {
      best_energy = e;
      best_cut = static_cast<std::size_t>(center);
      best_dist = dist;
      found = true;
    } else if (e <= best_energy + kTieDb && dist < best_dist) {
      best_energy = std::min(best_energy, e);
      best_cut = static_cast<std::size_t>(center);
      best_dist = dist;
    }
  }
  if (!found) {
    best_cut = static_cast<std::size_t>(std::llround(target));
  }
  force_split(begin, best_cut, max_len, layout, energy, out);
  force_split(best_cut, end, max_len, layout, energy, out);
}

}  // namespace

PcmBuffer decode_audio(std::string_view bytes, AudioFormat format) {
  if (format != AudioFormat::WavPcm16) {
    throw Error(Errc::UnsupportedEncoding, "only WAV PCM16 is supported");
  }
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE") {
    throw Error(Errc::MalformedHeader, "not a RIFF/WAVE stream");
  }
  const std::uint64_t riff_size = read_u32(bytes, 4);
  if (riff_size + 8 > bytes.size()) {
    throw Error(Errc::TruncatedPayload,
                "RIFF header declares " + std::to_string(riff_size + 8) +
                    " bytes, stream has " + std::to_string(bytes.size()));
  }
  const std::size_t limit = static_cast<std::size_t>(riff_size + 8);

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::size_t off = 12;
  while (off + 8 <= limit) {
    const std::string_view id = bytes.substr(off, 4);
    const std::uint64_t size = read_u32(bytes, off + 4);
    const std::size_t body = off + 8;
    if (body + size > limit) {
      throw Error(Errc::TruncatedPayload,
                  "chunk '" + std::string(id) + "' runs past end of stream");
    }
    if (id == "fmt ") {
      if (size < 16) throw Error(Errc::MalformedHeader, "fmt chunk too short");
      std::uint16_t tag = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      sample_rate = read_u32(bytes, body + 4);
      block_align = read_u16(bytes, body + 12);
      const std::uint16_t bits = read_u16(bytes, body + 14);
      if (tag == kFormatExtensible && size >= 26) {
        tag = read_u16(bytes, body + 24);  // first two bytes of SubFormat GUID
      }
      if (tag != kFormatPcm) {
        throw Error(Errc::UnsupportedEncoding,
                    "WAV format tag " + std::to_string(tag) + " is not PCM");
      }
      if (bits != 16) {
        throw Error(Errc::UnsupportedEncoding,
                    std::to_string(bits) + "-bit PCM is not supported");
      }
      if (channels == 0 || sample_rate == 0) {
        throw Error(Errc::MalformedHeader, "zero channels or sample rate");
      }
      if (channels > 2) {
        throw Error(Errc::UnsupportedEncoding,
                    std::to_string(channels) + " channels; mono or stereo only");
      }
      if (block_align != channels * 2) {
        throw Error(Errc::MalformedHeader, "block align does not match channels");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) {
        throw Error(Errc::MalformedHeader, "data chunk precedes fmt chunk");
      }
      if (size % block_align != 0) {
        throw Error(Errc::TruncatedPayload, "data chunk ends mid-frame");
      }
      if (size == 0) throw Error(Errc::MalformedHeader, "data chunk is empty");
      const std::size_t frames = static_cast<std::size_t>(size / block_align);
      PcmBuffer pcm;
      pcm.sample_rate_hz = static_cast<int>(sample_rate);
      pcm.samples.resize(frames);
      for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t at = body + f * block_align;
        if (channels == 1) {
          const auto v = static_cast<std::int16_t>(read_u16(bytes, at));
          pcm.samples[f] = static_cast<float>(v / 32768.0);
        } else {
          const auto l = static_cast<std::int16_t>(read_u16(bytes, at));
          const auto r = static_cast<std::int16_t>(read_u16(bytes, at + 2));
          pcm.samples[f] = static_cast<float>((l + r) / 2.0 / 32768.0);
        }
      }
      return pcm;
    }
    off = body + static_cast<std::size_t>(size) + (size & 1);
  }
  if (!have_fmt) throw Error(Errc::MalformedHeader, "missing fmt chunk");
  throw Error(Errc::TruncatedPayload, "missing data chunk");
}

std::string encode_wav(const PcmBuffer& pcm) {
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(pcm.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(pcm.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(pcm.sample_rate_hz * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (float s : pcm.samples) {
    const long v = std::clamp(std::lround(static_cast<double>(s) * 32768.0),
                              -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

FrameLayout FrameLayout::make(std::size_t num_samples, int sample_rate_hz,
                              double frame_ms, double hop_ms) {
  if (!(hop_ms > 0.0) || frame_ms < hop_ms) {
    throw Error(Errc::InvalidArgument, "need frame_ms >= hop_ms > 0");
  }
  if (sample_rate_hz <= 0) {
    throw Error(Errc::InvalidArgument, "sample rate must be positive");
  }
  FrameLayout l;
  l.frame_len = static_cast<std::size_t>(
      std::max(1LL, std::llround(frame_ms * sample_rate_hz / 1000.0)));
  l.hop_len = static_cast<std::size_t>(
      std::max(1LL, std::llround(hop_ms * sample_rate_hz / 1000.0)));
  l.num_frames = num_samples >= l.frame_len
                     ? (num_samples - l.frame_len) / l.hop_len + 1
                     : 1;
  return l;
}

std::vector<double> frame_energies(const PcmBuffer& pcm, double frame_ms,
                                   double hop_ms) {
  if (pcm.samples.empty()) throw Error(Errc::EmptyBuffer, "no samples");
  const auto layout =
      FrameLayout::make(pcm.size(), pcm.sample_rate_hz, frame_ms, hop_ms);
  std::vector<double> out(layout.num_frames);
  for (std::size_t i = 0; i < layout.num_frames; ++i) {
    out[i] = rms_to_db(std::sqrt(frame_power(pcm, layout, i)));
  }
  return out;
}

void VadConfig::validate() const {
  if (!(noise_floor_percentile > 0.0 && noise_floor_percentile <= 50.0)) {
    throw Error(Errc::InvalidArgument, "noise_floor_percentile must be in (0, 50]");
  }
  if (!(min_segment_s > 0.0 && min_segment_s < max_segment_s)) {
    throw Error(Errc::InvalidArgument, "need 0 < min_segment_s < max_segment_s");
  }
  if (hangover_frames < 0 || min_silence_s < 0.0 || context_pad_s < 0.0) {
    throw Error(Errc::InvalidArgument, "negative VAD timing parameter");
  }
}

std::size_t VadMask::speech_frames() const {
  return static_cast<std::size_t>(
      std::count(decisions.begin(), decisions.end(), true));
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(Errc::EmptyBuffer, "percentile of nothing");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = std::clamp(p, 0.0, 100.0) / 100.0 *
                      static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

VadMask detect_voice_activity(std::span<const double> energies,
                              const VadConfig& cfg) {
  cfg.validate();
  if (energies.empty()) throw Error(Errc::EmptyBuffer, "no frames");
  const double floor = percentile(energies, cfg.noise_floor_percentile);
  const double threshold = floor + cfg.threshold_db_over_floor;
  VadMask mask;
  mask.frame_ms = cfg.frame_ms;
  mask.hop_ms = cfg.hop_ms;
  mask.decisions.assign(energies.size(), false);
  const auto hang = static_cast<std::size_t>(cfg.hangover_frames);
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (energies[i] > threshold) {
      const std::size_t last = std::min(energies.size() - 1, i + hang);
      for (std::size_t k = i; k <= last; ++k) mask.decisions[k] = true;
    }
  }
  return mask;
}

std::vector<AudioSegment> split_on_silence(const PcmBuffer& pcm,
                                           const VadMask& mask,
                                           const VadConfig& cfg) {
  cfg.validate();
  const auto layout = layout_for(pcm, mask);
  const std::size_t n = pcm.size();
  const double sr = pcm.sample_rate_hz;

  // Speech runs as sample intervals. Frame i owns [i*hop, (i+1)*hop); the
  // final frame owns through its full length.
  struct Run {
    std::size_t begin, end;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < layout.num_frames;) {
    if (!mask.decisions[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < layout.num_frames && mask.decisions[j + 1]) ++j;
    const std::size_t begin = std::min(n, layout.frame_start(i));
    const std::size_t end =
        j + 1 == layout.num_frames
            ? std::min(n, layout.frame_start(j) + layout.frame_len)
            : std::min(n, layout.frame_start(j + 1));
    if (end > begin) runs.push_back({begin, end});
    i = j + 1;
  }

  const auto min_gap =
      static_cast<std::size_t>(std::llround(cfg.min_silence_s * sr));
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && r.begin - merged.back().end < min_gap) {
      merged.back().end = r.end;
    } else {
      merged.push_back(r);
    }
  }

  const auto pad = static_cast<std::size_t>(std::llround(cfg.context_pad_s * sr));
  std::vector<AudioSegment> padded;
  for (const Run& r : merged) {
    AudioSegment s;
    s.sample_rate_hz = pcm.sample_rate_hz;
    s.speech_begin = r.begin;
    s.speech_end = r.end;
    s.begin = r.begin > pad ? r.begin - pad : 0;
    s.end = std::min(n, r.end + pad);
    padded.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < padded.size(); ++i) {
    if (padded[i].end > padded[i + 1].begin) {
      const std::size_t mid =
          (padded[i].speech_end + padded[i + 1].speech_begin) / 2;
      padded[i].end = mid;
      padded[i + 1].begin = mid;
    }
  }

  const double min_len = cfg.min_segment_s * sr;
  const auto max_len =
      static_cast<std::size_t>(std::floor(cfg.max_segment_s * sr));
  std::vector<double> energy;
  std::vector<AudioSegment> out;
  for (const AudioSegment& s : padded) {
    if (static_cast<double>(s.end - s.begin) < min_len) continue;
    if (s.end - s.begin <= max_len) {
      out.push_back(s);
      continue;
    }
    if (energy.empty()) {
      energy = frame_energies(pcm, mask.frame_ms, mask.hop_ms);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pieces;
    force_split(s.begin, s.end, max_len, layout, energy, pieces);
    for (const auto& [b, e] : pieces) {
      AudioSegment piece = s;
      piece.begin = b;
      piece.end = e;
      piece.speech_begin = std::clamp(s.speech_begin, b, e);
      piece.speech_end = std::clamp(s.speech_end, b, e);
      out.push_back(piece);
    }
  }
  return out;
}

PcmBuffer slice(const PcmBuffer& pcm, const AudioSegment& segment) {
  if (segment.begin >= segment.end || segment.end > pcm.size()) {
    throw Error(Errc::InvalidArgument, "segment outside buffer");
  }
  PcmBuffer out;
  out.sample_rate_hz = pcm.sample_rate_hz;
  out.samples.assign(pcm.samples.begin() + static_cast<std::ptrdiff_t>(segment.begin),
                     pcm.samples.begin() + static_cast<std::ptrdiff_t>(segment.end));
  return out;
}

double estimate_snr(const PcmBuffer& pcm, const VadMask& mask) {
  const auto layout = layout_for(pcm, mask);
  double speech = 0.0, noise = 0.0;
  std::size_t n_speech = 0, n_noise = 0;
  std::vector<double> rms(layout.num_frames);
  for (std::size_t i = 0; i < layout.num_frames; ++i) {
    const double p = frame_power(pcm, layout, i);
    rms[i] = std::sqrt(p);
    if (mask.decisions[i]) {
      speech += p;
      ++n_speech;
    } else {
      noise += p;
      ++n_noise;
    }
  }
  if (n_speech == 0) return kMinusInfDb;
  const double speech_power = speech / static_cast<double>(n_speech);
  double noise_power;
  if (n_noise > 0) {
    noise_power = noise / static_cast<double>(n_noise);
  } else {
    const double floor_rms = percentile(rms, 10.0);
    noise_power = floor_rms * floor_rms;
  }
  return snr_from_powers(speech_power, noise_power);
}

double estimate_segment_snr(const PcmBuffer& pcm, const VadMask& mask,
                            const AudioSegment& segment) {
  const auto layout = layout_for(pcm, mask);
  double speech = 0.0, noise = 0.0;
  std::size_t n_speech = 0, n_noise = 0;
  std::vector<double> inside_rms;
  for (std::size_t i = 0; i < layout.num_frames; ++i) {
    const double p = frame_power(pcm, layout, i);
    const std::size_t center = layout.frame_start(i) + layout.frame_len / 2;
    const bool inside = center >= segment.begin && center < segment.end;
    if (inside) inside_rms.push_back(std::sqrt(p));
    if (mask.decisions[i]) {
      if (inside) {
        speech += p;
        ++n_speech;
      }
    } else {
      noise += p;
      ++n_noise;
    }
  }
  if (n_speech == 0) return kMinusInfDb;
  double noise_power;
  if (n_noise > 0) {
    noise_power = noise / static_cast<double>(n_noise);
  } else {
    const double floor_rms = percentile(inside_rms, 10.0);
    noise_power = floor_rms * floor_rms;
  }
  return snr_from_powers(speech / static_cast<double>(n_speech), noise_power);
}

}  // namespace santlr
