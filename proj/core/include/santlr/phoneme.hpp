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

// Discrete phoneme-like symbol sequences per clip. The built-in estimator
// quantizes mean-normalized log mel filterbank frames against a per-task
// k-means codebook; an external command can stand in for a real recognizer.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "santlr/audio.hpp"
#include "santlr/model.hpp"

namespace santlr {

inline constexpr std::size_t kNumMelBands = 13;
inline constexpr double kFeatureFloor = 1e-10;

using FeatureVector = std::vector<double>;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Centres of the 13 triangular bands, equally spaced on the mel scale
// between 0 Hz and Nyquist.
std::vector<double> mel_band_centers_hz(int sample_rate_hz);

// One 13-band log-energy vector per 25 ms / 10 ms frame. Hann window,
// power spectrum via a power-of-two real FFT. Requires >= 8 kHz and at
// least one full frame (Error BufferTooShort otherwise).
std::vector<FeatureVector> extract_features(const PcmBuffer& pcm);

// Subtracts the vector's own mean across bands, cancelling global gain.
void mean_normalize(FeatureVector& v);

class Codebook {
 public:
  Codebook() = default;
  explicit Codebook(std::vector<FeatureVector> centroids);

  std::size_t size() const noexcept { return centroids_.size(); }
  const std::vector<FeatureVector>& centroids() const noexcept {
    return centroids_;
  }
  // Lowest index wins on exact distance ties.
  std::size_t nearest(const FeatureVector& v) const;

  bool operator==(const Codebook&) const = default;

 private:
  std::vector<FeatureVector> centroids_;
};

double squared_distance(const FeatureVector& a, const FeatureVector& b);

// Sum of squared distances from each frame to its nearest centroid.
double inertia(std::span<const FeatureVector> frames, const Codebook& codebook);

struct KMeansOptions {
  std::uint64_t seed = 42;
  int max_iterations = 100;
  double relative_tolerance = 1e-4;
};

// k-means++ seeding then Lloyd iterations. Deterministic for a given seed.
// Error InsufficientData when there are fewer than k distinct frames.
Codebook fit_codebook(std::span<const FeatureVector> frames, std::size_t k,
                      const KMeansOptions& options = {});

enum class EstimatorKind { BuiltinSpectral, ExternalCommand };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::BuiltinSpectral;
  std::size_t alphabet_size = 32;
  std::optional<Codebook> codebook;
  // argv; every "{wav}" inside an element is replaced by the clip path.
  std::vector<std::string> external_cmd;
  KMeansOptions kmeans;
  // Frames used for fitting are strided down to at most this many.
  std::size_t max_fit_frames = 20000;
};

// Task-level mapping from external recognizer symbols to ids.
class SymbolTable {
 public:
  Symbol intern(const std::string& symbol);
  std::vector<std::string> symbols() const;
  void restore(const std::vector<std::string>& symbols);

 private:
  mutable std::mutex mu_;
  std::map<std::string, Symbol> ids_;
  std::vector<std::string> names_;
};

// Fits `spec.codebook` on the mean-normalized features of `clips`. The
// alphabet shrinks to the number of distinct frames in very small tasks.
void fit_spectral_codebook(EstimatorSpec& spec,
                           std::span<const PcmBuffer> clips);

// Error NotFitted if a builtin estimator has no codebook; ExternalCommandFailed on
// a non-zero exit or unparseable output.
PhonemeSequence estimate_phonemes(const std::string& clip_id,
                                  const PcmBuffer& clip,
                                  const EstimatorSpec& spec,
                                  SymbolTable* symbols = nullptr);

}  // namespace santlr
