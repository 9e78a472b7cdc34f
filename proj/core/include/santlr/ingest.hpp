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

// Task creation pipeline shared by the CLI and the HTTP service: uploaded
// files -> utterances -> ranking -> persisted task.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "santlr/audio.hpp"
#include "santlr/model.hpp"
#include "santlr/persistence.hpp"
#include "santlr/phoneme.hpp"
#include "santlr/ranking_config.hpp"

namespace santlr {

struct UploadFile {
  std::string name;  // original file name, used for the kind check
  std::string bytes;
};

struct IngestOptions {
  Mode mode = Mode::Transcribe;
  RankingConfig ranking;
  std::string language_tag;
  VadConfig vad;
  EstimatorSpec estimator;
  // argv with {in} and {out}; produces media/<utterance_id>.mp3 per clip.
  std::vector<std::string> transcode_cmd;
  Timestamp created_at = now_utc();
};

// Called with (step, done, total) while preprocessing.
using ProgressFn =
    std::function<void(const std::string& step, std::size_t done,
                       std::size_t total)>;

// Error WrongFileKind naming the file if its extension does not match the
// mode (.wav for Transcribe, .txt for Record, case-insensitive), or if no
// files are given.
void check_upload_kinds(Mode mode, const std::vector<UploadFile>& files);

// Everything needed to commit a task, computed without touching disk.
struct PreparedTask {
  TaskState state;
  std::vector<MediaFile> media;
  std::vector<std::string> warnings;
};

// First, cheap phase: decode and split (or clean and segment) the uploads
// into unranked utterances.
struct SegmentedUpload {
  TaskDescriptor descriptor;
  std::vector<Utterance> utterances;
  std::vector<PcmBuffer> clips;  // parallel to utterances in Transcribe mode
  std::vector<MediaFile> media;
  std::vector<std::string> warnings;
};

// Errors: WrongFileKind; MalformedHeader / UnsupportedEncoding /
// TruncatedPayload from WAV decoding; NoUtterances when preprocessing yields
// nothing.
SegmentedUpload segment_uploads(const TaskDescriptor& descriptor,
                                const std::vector<UploadFile>& files,
                                const IngestOptions& options);

// Second phase: phoneme estimation (audio) and ranking.
PreparedTask finish_prepare(SegmentedUpload upload,
                            const IngestOptions& options,
                            const ProgressFn& progress = {});

// Both phases with a fresh descriptor.
PreparedTask prepare_task(const std::vector<UploadFile>& files,
                          const IngestOptions& options,
                          const ProgressFn& progress = {});

// Commits a prepared task under data_dir (atomically, running the transcode
// hook inside the staging directory).
TaskId commit_task(const std::filesystem::path& data_dir,
                   const PreparedTask& prepared, const IngestOptions& options);

inline TaskId ingest_task(const std::filesystem::path& data_dir,
                          const std::vector<UploadFile>& files,
                          const IngestOptions& options) {
  return commit_task(data_dir, prepare_task(files, options), options);
}

// Recomputes the ranking of a stored task with `cfg` and rewrites
// manifest.json, queue.json and ranking.json. Byte-identical for identical
// inputs. Requires the writer lock (Error LockBusy otherwise).
RankedQueue rerank_task(const std::filesystem::path& data_dir,
                        const TaskId& id, const RankingConfig& cfg);
// Same, through an already-open writer.
RankedQueue rerank_task(TaskStore& store, const RankingConfig& cfg);

// Runs argv (no shell) to completion; Error ExternalCommandFailed on spawn
// failure or non-zero exit.
void run_command(const std::vector<std::string>& argv);

std::string share_path(const TaskDescriptor& d);

}  // namespace santlr
