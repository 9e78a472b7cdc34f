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

#include "santlr/phoneme.hpp"

#include <fftw3.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <limits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "santlr/errors.hpp"

extern char** environ;

namespace santlr {

namespace {

constexpr double kFrameMs = 25.0;
constexpr double kHopMs = 10.0;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per size and never destroyed.
fftw_plan r2c_plan(std::size_t nfft) {
  static std::mutex mu;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(nfft);
  if (it != plans.end()) return it->second;
  double* in = fftw_alloc_real(nfft);
  fftw_complex* out = fftw_alloc_complex(nfft / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, out,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(nfft, plan);
  return plan;
}

struct Filterbank {
  std::size_t nfft = 0;
  // weights[band][bin]
  std::vector<std::vector<double>> weights;
};

Filterbank make_filterbank(int sample_rate_hz, std::size_t nfft) {
  const double nyquist = sample_rate_hz / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  std::vector<double> edges(kNumMelBands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) /
                         static_cast<double>(kNumMelBands + 1));
  }
  const std::size_t bins = nfft / 2 + 1;
  Filterbank fb;
  fb.nfft = nfft;
  fb.weights.assign(kNumMelBands, std::vector<double>(bins, 0.0));
  const double bin_hz = static_cast<double>(sample_rate_hz) / nfft;
  for (std::size_t m = 0; m < kNumMelBands; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    double total = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb.weights[m][k] = w;
      total += w;
    }
    if (total == 0.0) {
      const auto k = static_cast<std::size_t>(std::lround(mid / bin_hz));
      fb.weights[m][std::min(k, bins - 1)] = 1.0;
    }
  }
  return fb;
}

const Filterbank& cached_filterbank(int sample_rate_hz, std::size_t nfft) {
  static std::mutex mu;
  static std::map<std::pair<int, std::size_t>, Filterbank> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(sample_rate_hz, nfft);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, make_filterbank(sample_rate_hz, nfft)).first;
  }
  return it->second;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<FeatureVector> normalized_features(const PcmBuffer& pcm) {
  auto feats = extract_features(pcm);
  for (auto& f : feats) mean_normalize(f);
  return feats;
}

// Runs argv, returns captured stdout; throws on spawn failure or non-zero
// exit status.
std::string run_capture(const std::vector<std::string>& argv) {
  int fds[2];
  if (pipe(fds) != 0) {
    throw Error(Errc::ExternalCommandFailed, "pipe() failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  posix_spawn_file_actions_addclose(&actions, fds[1]);
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(),
                              environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    throw Error(Errc::ExternalCommandFailed,
                "cannot start '" + argv.front() + "'");
  }
  std::string output;
  char buf[4096];
  for (;;) {
    const ssize_t got = read(fds[0], buf, sizeof buf);
    if (got > 0) {
      output.append(buf, static_cast<std::size_t>(got));
    } else if (got == 0 || errno != EINTR) {
      break;
    }
  }
  close(fds[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(Errc::ExternalCommandFailed,
                "'" + argv.front() + "' exited with status " +
                    std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  return output;
}

class TempWav {
 public:
  explicit TempWav(const PcmBuffer& pcm) {
    const char* dir = std::getenv("TMPDIR");
    std::string pattern = std::string(dir ? dir : "/tmp") + "/santlr-XXXXXX.wav";
    const int fd = mkstemps(pattern.data(), 4);
    if (fd < 0) throw Error(Errc::StorageFailure, "cannot create temp file");
    const std::string bytes = encode_wav(pcm);
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = write(fd, bytes.data() + off, bytes.size() - off);
      if (n <= 0) {
        close(fd);
        std::remove(pattern.c_str());
        throw Error(Errc::StorageFailure, "cannot write temp file");
      }
      off += static_cast<std::size_t>(n);
    }
    close(fd);
    path_ = pattern;
  }
  ~TempWav() { std::remove(path_.c_str()); }
  TempWav(const TempWav&) = delete;
  TempWav& operator=(const TempWav&) = delete;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

PhonemeSequence run_external(const std::string& clip_id, const PcmBuffer& clip,
                             const EstimatorSpec& spec, SymbolTable& symbols) {
  if (spec.external_cmd.empty()) {
    throw Error(Errc::ExternalCommandFailed, "no external command configured");
  }
  TempWav wav(clip);
  std::vector<std::string> argv;
  for (std::string arg : spec.external_cmd) {
    for (std::size_t pos; (pos = arg.find("{wav}")) != std::string::npos;) {
      arg.replace(pos, 5, wav.path());
    }
    argv.push_back(std::move(arg));
  }
  std::string out = run_capture(argv);
  if (!out.empty() && out.back() == '\n') out.pop_back();
  if (!out.empty() && out.back() == '\r') out.pop_back();
  if (out.find('\n') != std::string::npos) {
    throw Error(Errc::ExternalCommandFailed,
                "expected one line of symbols from '" + argv.front() + "'");
  }
  std::istringstream in(out);
  std::vector<Symbol> raw;
  for (std::string sym; in >> sym;) raw.push_back(symbols.intern(sym));
  if (raw.empty()) {
    throw Error(Errc::ExternalCommandFailed,
                "'" + argv.front() + "' printed no symbols");
  }
  return PhonemeSequence::collapsed(clip_id, raw);
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> mel_band_centers_hz(int sample_rate_hz) {
  const double mel_max = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> out(kNumMelBands);
  for (std::size_t m = 0; m < kNumMelBands; ++m) {
    out[m] = mel_to_hz(mel_max * static_cast<double>(m + 1) /
                       static_cast<double>(kNumMelBands + 1));
  }
  return out;
}

std::vector<FeatureVector> extract_features(const PcmBuffer& pcm) {
  if (pcm.sample_rate_hz < 8000) {
    throw Error(Errc::InvalidArgument, "feature extraction needs >= 8 kHz");
  }
  const auto layout =
      FrameLayout::make(pcm.size(), pcm.sample_rate_hz, kFrameMs, kHopMs);
  if (pcm.size() < layout.frame_len) {
    throw Error(Errc::BufferTooShort,
                std::to_string(pcm.size()) + " samples is less than one frame");
  }
  const std::size_t nfft = next_pow2(layout.frame_len);
  const Filterbank& fb = cached_filterbank(pcm.sample_rate_hz, nfft);
  const fftw_plan plan = r2c_plan(nfft);

  std::vector<double> window(layout.frame_len);
  for (std::size_t i = 0; i < window.size(); ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i /
                                     static_cast<double>(window.size() - 1));
  }
  std::vector<double> in(nfft, 0.0);
  std::vector<fftw_complex> spec(nfft / 2 + 1);
  std::vector<double> power(nfft / 2 + 1);
  std::vector<FeatureVector> out(layout.num_frames,
                                 FeatureVector(kNumMelBands));
  for (std::size_t f = 0; f < layout.num_frames; ++f) {
    const std::size_t start = layout.frame_start(f);
    for (std::size_t i = 0; i < layout.frame_len; ++i) {
      in[i] = pcm.samples[start + i] * window[i];
    }
    fftw_execute_dft_r2c(plan, in.data(), spec.data());
    for (std::size_t k = 0; k < power.size(); ++k) {
      power[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    }
    for (std::size_t m = 0; m < kNumMelBands; ++m) {
      double e = 0.0;
      const auto& w = fb.weights[m];
      for (std::size_t k = 0; k < power.size(); ++k) e += w[k] * power[k];
      out[f][m] = std::log(std::max(e, kFeatureFloor));
    }
  }
  return out;
}

void mean_normalize(FeatureVector& v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

Codebook::Codebook(std::vector<FeatureVector> centroids)
    : centroids_(std::move(centroids)) {}

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

std::size_t Codebook::nearest(const FeatureVector& v) const {
  if (centroids_.empty()) throw Error(Errc::NotFitted, "empty codebook");
  std::size_t best = 0;
  double best_d = squared_distance(v, centroids_[0]);
  for (std::size_t i = 1; i < centroids_.size(); ++i) {
    const double d = squared_distance(v, centroids_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double inertia(std::span<const FeatureVector> frames, const Codebook& codebook) {
  double total = 0.0;
  for (const auto& f : frames) {
    total += squared_distance(f, codebook.centroids()[codebook.nearest(f)]);
  }
  return total;
}

Codebook fit_codebook(std::span<const FeatureVector> frames, std::size_t k,
                      const KMeansOptions& options) {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be >= 1");
  std::vector<FeatureVector> distinct(frames.begin(), frames.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < k) {
    throw Error(Errc::InsufficientData,
                std::to_string(distinct.size()) + " distinct frames for k=" +
                    std::to_string(k));
  }
  const std::size_t n = frames.size();
  const std::size_t dim = frames[0].size();
  std::mt19937_64 rng(options.seed);

  std::vector<FeatureVector> centroids;
  centroids.push_back(frames[std::min(
      n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)))]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(frames[i], centroids[0]);
  while (centroids.size() < k) {
    double sum = 0.0;
    for (double d : d2) sum += d;
    const double r = uniform01(rng) * sum;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > r) break;
    }
    centroids.push_back(frames[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(frames[i], centroids.back()));
    }
  }

  std::vector<std::size_t> assign(n, 0);
  double prev_inertia = -1.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Codebook current(centroids);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = current.nearest(frames[i]);
      total += squared_distance(frames[i], centroids[assign[i]]);
    }
    std::vector<FeatureVector> sums(k, FeatureVector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += frames[i][d];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t d = 0; d < dim; ++d) {
          centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
        continue;
      }
      // Empty cluster: move it to the frame farthest from its centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double d = squared_distance(frames[i], centroids[assign[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[far] = true;
      centroids[c] = frames[far];
    }
    if (prev_inertia >= 0.0) {
      const double change = prev_inertia > 0.0
                                ? std::abs(prev_inertia - total) / prev_inertia
                                : 0.0;
      if (change < options.relative_tolerance) break;
    }
    prev_inertia = total;
  }
  return Codebook(std::move(centroids));
}

Symbol SymbolTable::intern(const std::string& symbol) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = ids_.find(symbol);
  if (it != ids_.end()) return it->second;
  if (names_.size() > std::numeric_limits<Symbol>::max()) {
    throw Error(Errc::ExternalCommandFailed, "symbol inventory overflow");
  }
  const auto id = static_cast<Symbol>(names_.size());
  ids_.emplace(symbol, id);
  names_.push_back(symbol);
  return id;
}

std::vector<std::string> SymbolTable::symbols() const {
  std::lock_guard<std::mutex> lock(mu_);
  return names_;
}

void SymbolTable::restore(const std::vector<std::string>& symbols) {
  std::lock_guard<std::mutex> lock(mu_);
  ids_.clear();
  names_.clear();
  for (const auto& s : symbols) {
    ids_.emplace(s, static_cast<Symbol>(names_.size()));
    names_.push_back(s);
  }
}

void fit_spectral_codebook(EstimatorSpec& spec,
                           std::span<const PcmBuffer> clips) {
  if (spec.alphabet_size < 2) {
    throw Error(Errc::InvalidArgument, "alphabet size must be >= 2");
  }
  std::vector<FeatureVector> all;
  for (const auto& clip : clips) {
    auto feats = normalized_features(clip);
    all.insert(all.end(), std::make_move_iterator(feats.begin()),
               std::make_move_iterator(feats.end()));
  }
  if (all.empty()) throw Error(Errc::InsufficientData, "no feature frames");
  if (spec.max_fit_frames > 0 && all.size() > spec.max_fit_frames) {
    std::vector<FeatureVector> strided;
    strided.reserve(spec.max_fit_frames);
    for (std::size_t i = 0; i < spec.max_fit_frames; ++i) {
      strided.push_back(all[i * all.size() / spec.max_fit_frames]);
    }
    all = std::move(strided);
  }
  std::vector<FeatureVector> distinct = all;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t k = std::min(spec.alphabet_size, distinct.size());
  spec.codebook = fit_codebook(all, k, spec.kmeans);
}

PhonemeSequence estimate_phonemes(const std::string& clip_id,
                                  const PcmBuffer& clip,
                                  const EstimatorSpec& spec,
                                  SymbolTable* symbols) {
  if (spec.kind == EstimatorKind::ExternalCommand) {
    if (symbols == nullptr) {
      throw Error(Errc::InvalidArgument, "external estimator needs a symbol table");
    }
    return run_external(clip_id, clip, spec, *symbols);
  }
  if (!spec.codebook || spec.codebook->size() == 0) {
    throw Error(Errc::NotFitted, "spectral estimator has no codebook");
  }
  const auto feats = normalized_features(clip);
  std::vector<Symbol> raw;
  raw.reserve(feats.size());
  for (const auto& f : feats) {
    raw.push_back(static_cast<Symbol>(spec.codebook->nearest(f)));
  }
  return PhonemeSequence::collapsed(clip_id, raw);
}

}  // namespace santlr
