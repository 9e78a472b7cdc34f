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

// File-based task store.
//
//   <data_dir>/<task_id>/
//     manifest.json    task descriptor + utterances + scores ("schema": 1)
//     queue.json       current ranked queue
//     annotations.log  append-only, one checksummed JSON record per line
//     media/           immutable clips, sources and recordings
//     .lock            advisory writer lock
//
// Whole files are replaced by write-temp, fsync, rename. Appends are fsynced
// before they are acknowledged; a torn tail is discarded on replay.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "santlr/model.hpp"
#include "santlr/ranking.hpp"

namespace santlr {

namespace fs = std::filesystem;

inline constexpr int kManifestSchema = 1;

struct SkipRecord {
  UtteranceId utterance_id;
  AnnotatorId annotator_id;
  Timestamp at{};

  bool operator==(const SkipRecord&) const = default;
};

using RecordKey = std::pair<UtteranceId, AnnotatorId>;

struct TaskState {
  TaskDescriptor descriptor;
  std::vector<Utterance> utterances;  // ingestion order
  RankedQueue queue;
  std::vector<AnnotationRecord> history;  // log order
  std::vector<SkipRecord> skips;
  std::map<RecordKey, AnnotationRecord> latest;
  std::vector<std::string> symbol_table;

  const Utterance* find(const UtteranceId& id) const;
  // The finalized record with the latest saved_at (later in the log on ties).
  const AnnotationRecord* latest_final(const UtteranceId& id) const;

  bool operator==(const TaskState&) const = default;
};

struct MediaFile {
  std::string name;  // file name inside media/
  std::string bytes;
};

// Line-framed append-only record log: "<crc32 hex> <payload>\n".
class AppendLog {
 public:
  // Opens for appending, truncating any torn tail first.
  explicit AppendLog(const fs::path& path);
  ~AppendLog();
  AppendLog(AppendLog&& other) noexcept;
  AppendLog& operator=(AppendLog&& other) noexcept;
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  // Durable (fsync) before returning.
  void append(std::string_view payload);

  // Payloads of every complete, checksum-valid record up to the first bad
  // one. `valid_bytes` receives the length of that clean prefix.
  static std::vector<std::string> replay(const fs::path& path,
                                         std::uint64_t* valid_bytes = nullptr);

 private:
  int fd_ = -1;
};

class TaskStore {
 public:
  using StagingHook = std::function<void(const fs::path& staging_dir)>;

  // Builds the task directory under a staging name and renames it into place,
  // so a failure leaves no partial task behind. Returns the store with the
  // writer lock held.
  static TaskStore create(const fs::path& data_dir, const TaskState& initial,
                          const std::vector<MediaFile>& media,
                          const StagingHook& before_commit = {});

  // Acquires the writer lock; Error LockBusy if another writer holds it.
  static TaskStore open(const fs::path& data_dir, const TaskId& id);

  // Read-only snapshot; safe while a writer is active.
  static TaskState load(const fs::path& data_dir, const TaskId& id);

  static bool exists(const fs::path& data_dir, const TaskId& id);
  static std::vector<TaskId> list(const fs::path& data_dir);

  TaskStore(TaskStore&&) noexcept;
  TaskStore& operator=(TaskStore&&) noexcept;
  ~TaskStore();

  const fs::path& dir() const noexcept { return dir_; }
  const TaskId& task_id() const noexcept { return id_; }
  TaskState load() const;

  // Requires record.revision == latest(utterance, annotator) + 1. A retry of
  // the latest accepted record with identical content is acknowledged with
  // no new append. Anything else throws StaleRevisionError.
  std::uint64_t append_annotation(const AnnotationRecord& record);
  std::uint64_t latest_revision(const UtteranceId& u,
                                const AnnotatorId& a) const;

  void append_skip(const SkipRecord& skip);

  // Rewrites manifest.json and queue.json (rerank).
  void write_ranking(const TaskState& state);

  // Stores bytes under media/ (no-op when the file already exists) and
  // returns the path relative to the task directory.
  std::string put_media(const std::string& name, std::string_view bytes);
  std::string read_media(const std::string& relative_path) const;

 private:
  TaskStore(fs::path dir, TaskId id, int lock_fd);

  fs::path dir_;
  TaskId id_;
  int lock_fd_ = -1;
  std::optional<AppendLog> log_;
  std::map<RecordKey, AnnotationRecord> latest_;
  std::set<std::string> utterance_ids_;
};

// Atomic whole-file replace: temp file in the same directory, fsync, rename,
// fsync of the directory.
void write_file_atomic(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);

// Lowercase hex SHA-256, used for content-addressed media names.
std::string content_hash(std::string_view bytes);

// ---- export ---------------------------------------------------------------

struct ExportOptions {
  bool exclude_skipped = false;
  Timestamp exported_at = now_utc();
};

struct ExportResult {
  std::string archive;  // ZIP bytes
  std::size_t items = 0;
  std::vector<std::string> warnings;
};

// ZIP with audio/<utterance_id>.wav per annotated utterance, transcripts.tsv
// and meta.json. With nothing annotated the archive holds only meta.json and
// a NothingAnnotated warning is returned.
ExportResult export_archive(const fs::path& task_dir, const TaskState& state,
                            const ExportOptions& options = {});

struct TranscriptRow {
  std::string utterance_id;
  std::string text;
  double duration_s = 0.0;
  std::string annotator_id;

  bool operator==(const TranscriptRow&) const = default;
};

// Backslash, tab, CR and LF become two-character escapes.
std::string escape_tsv_field(std::string_view text);
std::string unescape_tsv_field(std::string_view text);

std::string write_transcripts_tsv(const std::vector<TranscriptRow>& rows);
// Expects the header row; Error InvalidArgument on a malformed row.
std::vector<TranscriptRow> parse_transcripts_tsv(std::string_view tsv);

}  // namespace santlr
