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

#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "santlr/ranking_config.hpp"

namespace santlr {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();
// ISO-8601 with millisecond precision, always UTC: 2026-10-14T08:30:00.000Z
std::string format_utc(Timestamp t);
Timestamp parse_utc(std::string_view text);

// Opaque string identifiers, one distinct type per domain concept.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const Id&) const = default;

 private:
  std::string value_;
};

using TaskId = Id<struct TaskIdTag>;
using UtteranceId = Id<struct UtteranceIdTag>;
using AnnotatorId = Id<struct AnnotatorIdTag>;

struct IdHash {
  template <typename Tag>
  std::size_t operator()(const Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

enum class Mode { Transcribe, Record };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

// Random URL-safe token (base64url, no padding) drawn from the system CSPRNG.
std::string random_token(std::size_t bytes = 32);

class TaskDescriptor {
 public:
  TaskDescriptor(TaskId task_id, Mode mode, std::string share_token,
                 std::string admin_token, Timestamp created_at,
                 std::string language_tag, RankingConfig config);

  const TaskId& task_id() const noexcept { return task_id_; }
  Mode mode() const noexcept { return mode_; }
  const std::string& share_token() const noexcept { return share_token_; }
  const std::string& admin_token() const noexcept { return admin_token_; }
  Timestamp created_at() const noexcept { return created_at_; }
  const std::string& language_tag() const noexcept { return language_tag_; }
  const RankingConfig& config() const noexcept { return config_; }

  // Reranking may change parameters; mode stays fixed for the task's life.
  void set_config(const RankingConfig& config);

  bool operator==(const TaskDescriptor&) const = default;

 private:
  TaskId task_id_;
  Mode mode_;
  std::string share_token_;
  std::string admin_token_;
  Timestamp created_at_;
  std::string language_tag_;
  RankingConfig config_;
};

// Fresh descriptor with random task id, share token (256 bits) and admin
// token. Validates the config.
TaskDescriptor new_task(Mode mode, const RankingConfig& config,
                        std::string language_tag = {},
                        Timestamp created_at = now_utc());

using Symbol = std::uint16_t;

// Run-length collapsed symbol sequence: no two adjacent symbols are equal.
struct PhonemeSequence {
  std::string clip_id;
  std::vector<Symbol> symbols;

  static PhonemeSequence collapsed(std::string clip_id,
                                   const std::vector<Symbol>& raw);

  bool operator==(const PhonemeSequence&) const = default;
};

struct ScoreBreakdown {
  double base_raw = 0.0;    // duration in seconds, or per-token perplexity
  double base_score = 0.0;  // base_raw min-max normalized over the batch
  double snr_penalty = 0.0;
  double overlap_penalty = 0.0;
  double final_score = 0.0;

  bool operator==(const ScoreBreakdown&) const = default;
};

struct AudioClipRef {
  std::string clip_id;
  std::string source_file;  // relative to the task directory
  std::string media_file;   // extracted clip, relative to the task directory
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s = 0.0;
  int sample_rate_hz = 0;
  std::optional<double> snr_db;
  std::optional<PhonemeSequence> phonemes;

  bool operator==(const AudioClipRef&) const = default;
};

struct TextItem {
  std::string text_id;
  std::string sentence;
  std::vector<std::string> tokens;
  std::optional<double> perplexity_per_token;

  bool operator==(const TextItem&) const = default;
};

enum class UtteranceState { Pending, Leased, Annotated, Skipped };
enum class UtteranceEvent {
  LeaseGranted,
  LeaseExpired,
  AnnotationFinalized,
  SkipRequested
};

std::string_view to_string(UtteranceState state);
std::string_view to_string(UtteranceEvent event);

struct Utterance {
  UtteranceId utterance_id;
  TaskId task_id;
  std::variant<AudioClipRef, TextItem> payload;
  std::size_t ingest_index = 0;
  std::size_t priority_rank = 0;
  ScoreBreakdown scores;
  UtteranceState state = UtteranceState::Pending;

  bool is_audio() const noexcept {
    return std::holds_alternative<AudioClipRef>(payload);
  }
  const AudioClipRef& audio() const { return std::get<AudioClipRef>(payload); }
  const TextItem& text() const { return std::get<TextItem>(payload); }

  bool operator==(const Utterance&) const = default;
};

// Pending -> Leased -> {Annotated, Pending (expiry), Skipped}. Annotated and
// Skipped are terminal. Throws Error(IllegalTransition) otherwise.
UtteranceState next_state(UtteranceState state, UtteranceEvent event);
Utterance transition_state(Utterance u, UtteranceEvent event);

// Payload variant must agree with the task mode.
bool payload_matches(const Utterance& u, Mode mode);

struct TranscriptText {
  std::string text;
  bool operator==(const TranscriptText&) const = default;
};

struct RecordingRef {
  std::string path;  // relative to the task directory
  double duration_s = 0.0;
  bool operator==(const RecordingRef&) const = default;
};

struct AnnotationRecord {
  UtteranceId utterance_id;
  AnnotatorId annotator_id;
  std::variant<TranscriptText, RecordingRef> content;
  std::uint64_t revision = 0;
  Timestamp saved_at{};
  bool final = false;

  bool operator==(const AnnotationRecord&) const = default;
};

struct Lease {
  UtteranceId utterance_id;
  AnnotatorId annotator_id;
  Timestamp issued_at{};
  std::chrono::seconds ttl{900};

  Timestamp expires_at() const { return issued_at + ttl; }
  bool active_at(Timestamp now) const { return now < expires_at(); }
};

}  // namespace santlr
