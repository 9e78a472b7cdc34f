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

#include "santlr/ingest.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <map>

#include "santlr/errors.hpp"
#include "santlr/ranking.hpp"
#include "santlr/text.hpp"

extern char** environ;

namespace santlr {
namespace {

std::string lower_ext(const std::string& name) {
  const auto dot = name.rfind('.');
  if (dot == std::string::npos) return {};
  std::string ext = name.substr(dot);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::string utterance_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u%06zu", index);
  return buf;
}

std::string source_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "source_%03zu%s", index, ext);
  return buf;
}

std::string substitute(std::string arg, const std::string& key,
                       const std::string& value) {
  for (std::size_t pos = 0; (pos = arg.find(key, pos)) != std::string::npos;
       pos += value.size()) {
    arg.replace(pos, key.size(), value);
  }
  return arg;
}

void apply_ranking(TaskState& state, const RankedQueue& queue) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < queue.entries.size(); ++i) {
    rank[queue.entries[i].id] = i;
  }
  for (auto& u : state.utterances) {
    const std::size_t i = rank.at(u.utterance_id.str());
    u.priority_rank = i;
    u.scores = queue.entries[i].scores;
    if (!u.is_audio()) {
      std::get<TextItem>(u.payload).perplexity_per_token = u.scores.base_raw;
    }
  }
  state.queue = queue;
}

RankedQueue rank_state(const TaskState& state, const RankingConfig& cfg) {
  if (state.descriptor.mode() == Mode::Transcribe) {
    std::vector<AudioClipRef> clips;
    std::map<std::string, PhonemeSequence> phonemes;
    for (const auto& u : state.utterances) {
      const auto& a = u.audio();
      clips.push_back(a);
      if (a.phonemes) phonemes.emplace(a.clip_id, *a.phonemes);
    }
    return rank_audio(clips, phonemes, cfg);
  }
  std::vector<TextItem> items;
  for (const auto& u : state.utterances) items.push_back(u.text());
  return rank_text(items, cfg);
}

}  // namespace

void check_upload_kinds(Mode mode, const std::vector<UploadFile>& files) {
  if (files.empty()) {
    throw Error(Errc::WrongFileKind, "no files uploaded");
  }
  const char* want = mode == Mode::Transcribe ? ".wav" : ".txt";
  for (const auto& f : files) {
    if (lower_ext(f.name) != want) {
      throw Error(Errc::WrongFileKind,
                  "'" + f.name + "' is not a " + want + " file (" +
                      std::string(to_string(mode)) + " mode)");
    }
  }
}

SegmentedUpload segment_uploads(const TaskDescriptor& descriptor,
                                const std::vector<UploadFile>& files,
                                const IngestOptions& options) {
  check_upload_kinds(descriptor.mode(), files);
  options.vad.validate();
  SegmentedUpload out{descriptor, {}, {}, {}, {}};
  const TaskId& tid = descriptor.task_id();
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    const UploadFile& f = files[fi];
    if (descriptor.mode() == Mode::Transcribe) {
      if (f.bytes.empty()) {
        out.warnings.push_back("EmptyFile: " + f.name);
        continue;
      }
      PcmBuffer pcm;
      try {
        pcm = decode_audio(f.bytes);
      } catch (const Error& e) {
        throw Error(e.code(), f.name + ": " + e.message());
      }
      const std::string src = source_name(fi, ".wav");
      out.media.push_back({src, f.bytes});
      const auto energies =
          frame_energies(pcm, options.vad.frame_ms, options.vad.hop_ms);
      const VadMask mask = detect_voice_activity(energies, options.vad);
      const auto segments = split_on_silence(pcm, mask, options.vad);
      if (segments.empty()) {
        out.warnings.push_back("NoSpeech: " + f.name);
      }
      for (const auto& seg : segments) {
        const std::size_t index = out.utterances.size();
        const std::string uid = utterance_name(index);
        PcmBuffer clip = slice(pcm, seg);
        AudioClipRef a;
        a.clip_id = uid;
        a.source_file = "media/" + src;
        a.media_file = "media/" + uid + ".wav";
        a.start_s = seg.start_s();
        a.end_s = seg.end_s();
        a.duration_s = seg.duration_s();
        a.sample_rate_hz = pcm.sample_rate_hz;
        a.snr_db = estimate_segment_snr(pcm, mask, seg);
        out.media.push_back({uid + ".wav", encode_wav(clip)});
        Utterance u;
        u.utterance_id = UtteranceId(uid);
        u.task_id = tid;
        u.payload = std::move(a);
        u.ingest_index = index;
        out.utterances.push_back(std::move(u));
        out.clips.push_back(std::move(clip));
      }
    } else {
      const RawDocument doc =
          ingest_document(source_name(fi, ""), f.bytes, f.name);
      out.media.push_back({source_name(fi, ".txt"), doc.bytes});
      for (auto& sentence : segment_sentences(clean_text(doc.bytes))) {
        auto tokens = tokenize(sentence);
        if (tokens.empty()) continue;
        const std::size_t index = out.utterances.size();
        const std::string uid = utterance_name(index);
        Utterance u;
        u.utterance_id = UtteranceId(uid);
        u.task_id = tid;
        u.payload = TextItem{uid, std::move(sentence), std::move(tokens), {}};
        u.ingest_index = index;
        out.utterances.push_back(std::move(u));
      }
    }
  }
  if (out.utterances.empty()) {
    throw Error(Errc::NoUtterances, "preprocessing produced no utterances");
  }
  return out;
}

PreparedTask finish_prepare(SegmentedUpload upload,
                            const IngestOptions& options,
                            const ProgressFn& progress) {
  PreparedTask out{TaskState{upload.descriptor, std::move(upload.utterances),
                             {}, {}, {}, {}, {}},
                   std::move(upload.media), std::move(upload.warnings)};
  TaskState& state = out.state;
  const std::size_t n = state.utterances.size();
  if (state.descriptor.mode() == Mode::Transcribe) {
    EstimatorSpec spec = options.estimator;
    if (spec.kind == EstimatorKind::BuiltinSpectral && !spec.codebook) {
      if (progress) progress("fit", 0, n);
      fit_spectral_codebook(spec, upload.clips);
    }
    SymbolTable symbols;
    for (std::size_t i = 0; i < n; ++i) {
      if (progress) progress("phonemes", i, n);
      auto& a = std::get<AudioClipRef>(state.utterances[i].payload);
      a.phonemes = estimate_phonemes(a.clip_id, upload.clips[i], spec, &symbols);
    }
    if (spec.kind == EstimatorKind::ExternalCommand) {
      state.symbol_table = symbols.symbols();
    }
  }
  if (progress) progress("rank", 0, n);
  apply_ranking(state, rank_state(state, state.descriptor.config()));
  if (progress) progress("rank", n, n);
  return out;
}

PreparedTask prepare_task(const std::vector<UploadFile>& files,
                          const IngestOptions& options,
                          const ProgressFn& progress) {
  const TaskDescriptor d = new_task(options.mode, options.ranking,
                                    options.language_tag, options.created_at);
  return finish_prepare(segment_uploads(d, files, options), options, progress);
}

TaskId commit_task(const std::filesystem::path& data_dir,
                   const PreparedTask& prepared, const IngestOptions& options) {
  TaskStore::StagingHook hook;
  if (!options.transcode_cmd.empty() &&
      prepared.state.descriptor.mode() == Mode::Transcribe) {
    hook = [&](const std::filesystem::path& staging) {
      for (const auto& u : prepared.state.utterances) {
        const auto base = staging / "media" / u.utterance_id.str();
        std::vector<std::string> argv;
        for (const auto& arg : options.transcode_cmd) {
          argv.push_back(substitute(substitute(arg, "{in}", base.string() + ".wav"),
                                    "{out}", base.string() + ".mp3"));
        }
        run_command(argv);
      }
    };
  }
  TaskStore store =
      TaskStore::create(data_dir, prepared.state, prepared.media, hook);
  return store.task_id();
}

RankedQueue rerank_task(TaskStore& store, const RankingConfig& cfg) {
  cfg.validate();
  TaskState state = store.load();
  state.descriptor.set_config(cfg);
  const RankedQueue queue = rank_state(state, cfg);
  apply_ranking(state, queue);
  store.write_ranking(state);
  return queue;
}

RankedQueue rerank_task(const std::filesystem::path& data_dir,
                        const TaskId& id, const RankingConfig& cfg) {
  TaskStore store = TaskStore::open(data_dir, id);
  return rerank_task(store, cfg);
}

void run_command(const std::vector<std::string>& argv) {
  if (argv.empty()) {
    throw Error(Errc::ExternalCommandFailed, "empty command");
  }
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  pid_t pid = 0;
  const int rc =
      posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw Error(Errc::ExternalCommandFailed,
                argv[0] + ": " + std::strerror(rc));
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw Error(Errc::ExternalCommandFailed, argv[0] + ": waitpid failed");
    }
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(Errc::ExternalCommandFailed,
                argv[0] + " exited with status " +
                    std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
}

std::string share_path(const TaskDescriptor& d) {
  return "/t/" + d.task_id().str() + "?token=" + d.share_token();
}

}  // namespace santlr
