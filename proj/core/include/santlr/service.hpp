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

// Annotation workflow over the task store: leased assignment in ranked order,
// auto-saved annotations, recordings, progress and export. Transport
// independent; http_server.hpp exposes it over HTTP.

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "santlr/audio.hpp"
#include "santlr/ingest.hpp"
#include "santlr/model.hpp"
#include "santlr/persistence.hpp"
#include "santlr/phoneme.hpp"
#include "santlr/stats.hpp"

namespace santlr {

using Clock = std::function<Timestamp()>;

struct ServiceOptions {
  std::filesystem::path data_dir = "data";
  std::chrono::seconds lease_ttl{900};
  // Drafts from the previous holder are still accepted this long after the
  // lease expired.
  std::chrono::seconds draft_grace{120};
  std::size_t max_leases_per_annotator = 3;
  // Uploads yielding more utterances are ranked in the background.
  std::size_t async_threshold = 500;
  std::vector<std::string> transcode_cmd;
  VadConfig vad;
  EstimatorSpec estimator;
  Clock clock = now_utc;
  // Periodic lease sweep every lease_ttl / 3; off when false.
  bool background_sweep = true;
};

struct ProgressReport {
  std::size_t total = 0;
  std::size_t pending = 0;
  std::size_t annotated = 0;
  std::size_t leased = 0;
  std::size_t skipped = 0;
  std::size_t words_collected = 0;
  double audio_minutes_collected = 0.0;
  std::size_t active_annotators_last_10min = 0;
};

struct LeaseGrant {
  Utterance utterance;
  Lease lease;
  // Latest saved revision of this annotator on the utterance (0 if none) and
  // its content, so a client can resume a draft.
  std::uint64_t revision = 0;
  std::optional<AnnotationRecord> draft;
};

struct CreatedTask {
  TaskDescriptor descriptor;
  std::size_t utterances = 0;
  bool ready = true;  // false: ranking continues in the background
  std::vector<std::string> warnings;
};

struct TaskStatus {
  std::string state;  // "processing", "ready" or "failed"
  std::string step;
  std::size_t done = 0;
  std::size_t total = 0;
  std::string error;
};

struct AudioFile {
  std::string bytes;
  std::string content_type;
};

class AnnotationService {
 public:
  explicit AnnotationService(ServiceOptions options);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  const ServiceOptions& options() const noexcept { return options_; }

  CreatedTask create_task(Mode mode, const RankingConfig& cfg,
                          const std::string& language,
                          const std::vector<UploadFile>& files);
  TaskStatus status(const TaskId& task);

  // Error Unauthorized unless `token` is the task's share or admin token.
  void authorize(const TaskId& task, const std::string& token);
  void authorize_admin(const TaskId& task, const std::string& admin_token);
  TaskDescriptor descriptor(const TaskId& task);

  // Highest-priority pending utterance, leased to `annotator`; nullopt when
  // nothing is pending. Error LeaseLimit at the per-annotator cap.
  std::optional<LeaseGrant> next(const TaskId& task,
                                 const AnnotatorId& annotator);

  std::uint64_t save_transcript(const TaskId& task, const UtteranceId& u,
                                const AnnotatorId& annotator,
                                std::uint64_t revision, std::string text,
                                bool final);
  // Error UnsupportedMedia if `wav` does not decode.
  std::uint64_t save_recording(const TaskId& task, const UtteranceId& u,
                               const AnnotatorId& annotator,
                               std::uint64_t revision, std::string_view wav,
                               bool final);
  void skip(const TaskId& task, const UtteranceId& u,
            const AnnotatorId& annotator);

  ProgressReport progress(const TaskId& task);
  AudioFile audio(const TaskId& task, const UtteranceId& u);
  ExportResult export_task(const TaskId& task, bool exclude_skipped);
  // Window [end - window, end); end defaults to just after now.
  SessionStats stats(const TaskId& task, std::chrono::minutes window,
                     std::optional<Timestamp> end = std::nullopt);

  // Expires leases past their TTL in every loaded task.
  void sweep();

 private:
  struct Runtime;
  struct Pending;

  std::shared_ptr<Runtime> runtime(const TaskId& task);
  std::uint64_t save(const TaskId& task, const UtteranceId& u,
                     const AnnotatorId& annotator, std::uint64_t revision,
                     std::variant<TranscriptText, RecordingRef> content,
                     bool final, std::string_view media_bytes,
                     const std::string& media_name);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServiceOptions options_;
};

}  // namespace santlr
