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

#include "santlr/service.hpp"

#include <algorithm>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

#include "santlr/errors.hpp"
#include "santlr/text.hpp"

namespace santlr {
namespace {

bool same_token(const std::string& a, const std::string& b) {
  if (a.size() != b.size() || a.empty()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  }
  return diff == 0;
}

constexpr std::chrono::minutes kActiveWindow{10};

}  // namespace

struct AnnotationService::Runtime {
  std::mutex mu;
  TaskStore store;
  TaskState state;
  std::map<std::string, std::size_t> index;
  std::map<std::string, Lease> leases;     // utterance -> active lease
  std::map<RecordKey, Timestamp> expired;  // last expired lease end
  std::map<AnnotatorId, Timestamp> activity;

  Runtime(TaskStore s, TaskState st) : store(std::move(s)), state(std::move(st)) {
    for (std::size_t i = 0; i < state.utterances.size(); ++i) {
      index.emplace(state.utterances[i].utterance_id.str(), i);
    }
    for (const auto& r : state.history) {
      auto& t = activity[r.annotator_id];
      t = std::max(t, r.saved_at);
    }
  }

  Utterance& at(const UtteranceId& u) {
    auto it = index.find(u.str());
    if (it == index.end()) {
      throw Error(Errc::UtteranceNotFound, "no such utterance: " + u.str());
    }
    return state.utterances[it->second];
  }

  void expire(Timestamp now, std::chrono::seconds grace) {
    for (auto it = leases.begin(); it != leases.end();) {
      if (it->second.active_at(now)) {
        ++it;
        continue;
      }
      const Lease& l = it->second;
      expired[{l.utterance_id, l.annotator_id}] = l.expires_at();
      Utterance& u = at(l.utterance_id);
      u.state = next_state(u.state, UtteranceEvent::LeaseExpired);
      it = leases.erase(it);
    }
    for (auto it = expired.begin(); it != expired.end();) {
      it = now >= it->second + grace ? expired.erase(it) : std::next(it);
    }
  }
};

struct AnnotationService::Pending {
  std::mutex mu;
  TaskDescriptor descriptor;
  TaskStatus status;

  explicit Pending(TaskDescriptor d) : descriptor(std::move(d)) {
    status.state = "processing";
  }
};

struct AnnotationService::Impl {
  std::mutex mu;
  std::map<std::string, std::shared_ptr<Runtime>> tasks;
  std::map<std::string, std::shared_ptr<Pending>> pending;
  std::vector<std::thread> workers;
  std::thread sweeper;
  std::condition_variable cv;
  bool stopping = false;
};

AnnotationService::AnnotationService(ServiceOptions options)
    : impl_(std::make_unique<Impl>()), options_(std::move(options)) {
  if (options_.lease_ttl.count() <= 0) {
    throw Error(Errc::InvalidArgument, "lease ttl must be positive");
  }
  if (!options_.clock) options_.clock = now_utc;
  if (options_.background_sweep) {
    impl_->sweeper = std::thread([this] {
      const auto period = std::max<std::chrono::milliseconds>(
          std::chrono::milliseconds(1000),
          std::chrono::duration_cast<std::chrono::milliseconds>(options_.lease_ttl) / 3);
      std::unique_lock lock(impl_->mu);
      while (!impl_->cv.wait_for(lock, period, [this] { return impl_->stopping; })) {
        lock.unlock();
        sweep();
        lock.lock();
      }
    });
  }
}

AnnotationService::~AnnotationService() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopping = true;
    workers.swap(impl_->workers);
  }
  impl_->cv.notify_all();
  if (impl_->sweeper.joinable()) impl_->sweeper.join();
  for (auto& w : workers) w.join();
}

std::shared_ptr<AnnotationService::Runtime> AnnotationService::runtime(
    const TaskId& task) {
  std::lock_guard lock(impl_->mu);
  if (auto it = impl_->tasks.find(task.str()); it != impl_->tasks.end()) {
    return it->second;
  }
  if (impl_->pending.count(task.str())) {
    throw Error(Errc::TaskNotReady, "task " + task.str() + " is still processing");
  }
  if (!TaskStore::exists(options_.data_dir, task)) {
    throw Error(Errc::TaskNotFound, "no such task: " + task.str());
  }
  TaskStore store = TaskStore::open(options_.data_dir, task);
  TaskState state = store.load();
  auto rt = std::make_shared<Runtime>(std::move(store), std::move(state));
  impl_->tasks.emplace(task.str(), rt);
  return rt;
}

CreatedTask AnnotationService::create_task(Mode mode, const RankingConfig& cfg,
                                           const std::string& language,
                                           const std::vector<UploadFile>& files) {
  cfg.validate();
  check_upload_kinds(mode, files);
  IngestOptions opts;
  opts.mode = mode;
  opts.ranking = cfg;
  opts.language_tag = language;
  opts.vad = options_.vad;
  opts.estimator = options_.estimator;
  opts.transcode_cmd = options_.transcode_cmd;
  opts.created_at = options_.clock();
  const TaskDescriptor d = new_task(mode, cfg, language, opts.created_at);
  SegmentedUpload seg = segment_uploads(d, files, opts);
  CreatedTask out{d, seg.utterances.size(), true, seg.warnings};
  if (seg.utterances.size() <= options_.async_threshold) {
    const PreparedTask prepared = finish_prepare(std::move(seg), opts);
    commit_task(options_.data_dir, prepared, opts);
    out.warnings = prepared.warnings;
    return out;
  }
  auto pending = std::make_shared<Pending>(d);
  out.ready = false;
  std::lock_guard lock(impl_->mu);
  impl_->pending.emplace(d.task_id().str(), pending);
  impl_->workers.emplace_back(
      [this, pending, opts, seg = std::move(seg)]() mutable {
        try {
          auto progress = [&](const std::string& step, std::size_t done,
                              std::size_t total) {
            std::lock_guard l(pending->mu);
            pending->status.step = step;
            pending->status.done = done;
            pending->status.total = total;
          };
          const PreparedTask prepared =
              finish_prepare(std::move(seg), opts, progress);
          commit_task(options_.data_dir, prepared, opts);
          std::lock_guard l(impl_->mu);
          impl_->pending.erase(pending->descriptor.task_id().str());
        } catch (const std::exception& e) {
          std::lock_guard l(pending->mu);
          pending->status.state = "failed";
          pending->status.error = e.what();
        }
      });
  return out;
}

TaskStatus AnnotationService::status(const TaskId& task) {
  std::shared_ptr<Pending> p;
  {
    std::lock_guard lock(impl_->mu);
    if (auto it = impl_->pending.find(task.str()); it != impl_->pending.end()) {
      p = it->second;
    }
  }
  if (p) {
    std::lock_guard lock(p->mu);
    return p->status;
  }
  if (!TaskStore::exists(options_.data_dir, task)) {
    throw Error(Errc::TaskNotFound, "no such task: " + task.str());
  }
  TaskStatus s;
  s.state = "ready";
  s.step = "rank";
  return s;
}

TaskDescriptor AnnotationService::descriptor(const TaskId& task) {
  {
    std::lock_guard lock(impl_->mu);
    if (auto it = impl_->pending.find(task.str()); it != impl_->pending.end()) {
      return it->second->descriptor;
    }
  }
  auto rt = runtime(task);
  std::lock_guard lock(rt->mu);
  return rt->state.descriptor;
}

void AnnotationService::authorize(const TaskId& task, const std::string& token) {
  const TaskDescriptor d = descriptor(task);
  if (!same_token(token, d.share_token()) && !same_token(token, d.admin_token())) {
    throw Error(Errc::Unauthorized, "invalid share token");
  }
}

void AnnotationService::authorize_admin(const TaskId& task,
                                        const std::string& admin_token) {
  if (!same_token(admin_token, descriptor(task).admin_token())) {
    throw Error(Errc::Unauthorized, "invalid admin token");
  }
}

std::optional<LeaseGrant> AnnotationService::next(const TaskId& task,
                                                  const AnnotatorId& annotator) {
  if (annotator.empty()) {
    throw Error(Errc::InvalidArgument, "annotator_id is required");
  }
  auto rt = runtime(task);
  std::lock_guard lock(rt->mu);
  const Timestamp now = options_.clock();
  rt->expire(now, options_.draft_grace);
  rt->activity[annotator] = now;
  const auto held = static_cast<std::size_t>(std::count_if(
      rt->leases.begin(), rt->leases.end(),
      [&](const auto& kv) { return kv.second.annotator_id == annotator; }));
  if (held >= options_.max_leases_per_annotator) {
    throw Error(Errc::LeaseLimit, annotator.str() + " already holds " +
                                      std::to_string(held) + " leases");
  }
  for (const auto& e : rt->state.queue.entries) {
    Utterance& u = rt->state.utterances[rt->index.at(e.id)];
    if (u.state != UtteranceState::Pending) continue;
    u.state = next_state(u.state, UtteranceEvent::LeaseGranted);
    Lease lease{u.utterance_id, annotator, now, options_.lease_ttl};
    rt->leases[e.id] = lease;
    LeaseGrant g{u, lease, 0, std::nullopt};
    if (auto it = rt->state.latest.find({u.utterance_id, annotator});
        it != rt->state.latest.end()) {
      g.revision = it->second.revision;
      g.draft = it->second;
    }
    return g;
  }
  return std::nullopt;
}

std::uint64_t AnnotationService::save(
    const TaskId& task, const UtteranceId& uid, const AnnotatorId& annotator,
    std::uint64_t revision, std::variant<TranscriptText, RecordingRef> content,
    bool final, std::string_view media_bytes, const std::string& media_name) {
  if (annotator.empty()) {
    throw Error(Errc::InvalidArgument, "annotator_id is required");
  }
  auto rt = runtime(task);
  std::lock_guard lock(rt->mu);
  const Timestamp now = options_.clock();
  rt->expire(now, options_.draft_grace);
  Utterance& u = rt->at(uid);
  const bool wants_recording = std::holds_alternative<RecordingRef>(content);
  if (wants_recording != (rt->state.descriptor.mode() == Mode::Record)) {
    throw Error(Errc::InvalidArgument,
                wants_recording ? "recordings belong to Record tasks"
                                : "transcripts belong to Transcribe tasks");
  }
  const RecordKey key{uid, annotator};
  if (auto it = rt->state.latest.find(key); it != rt->state.latest.end() &&
                                            it->second.revision == revision &&
                                            it->second.content == content &&
                                            it->second.final == final) {
    return revision;
  }
  auto lease = rt->leases.find(uid.str());
  const bool holds =
      lease != rt->leases.end() && lease->second.annotator_id == annotator;
  if (!holds) {
    auto e = rt->expired.find(key);
    if (e == rt->expired.end()) {
      throw Error(Errc::LeaseRequired,
                  annotator.str() + " holds no lease on " + uid.str());
    }
    if (final) {
      throw Error(Errc::LeaseExpired, "lease on " + uid.str() + " expired");
    }
  }
  const std::uint64_t expected = rt->store.latest_revision(uid, annotator) + 1;
  if (revision != expected) throw StaleRevisionError(expected, revision);
  if (!media_bytes.empty()) rt->store.put_media(media_name, media_bytes);
  AnnotationRecord record{uid, annotator, std::move(content), revision, now, final};
  rt->store.append_annotation(record);
  rt->state.latest[key] = record;
  rt->state.history.push_back(std::move(record));
  rt->activity[annotator] = now;
  if (final && holds) {
    u.state = next_state(u.state, UtteranceEvent::AnnotationFinalized);
    rt->leases.erase(lease);
  }
  return revision;
}

std::uint64_t AnnotationService::save_transcript(const TaskId& task,
                                                 const UtteranceId& u,
                                                 const AnnotatorId& annotator,
                                                 std::uint64_t revision,
                                                 std::string text, bool final) {
  return save(task, u, annotator, revision, TranscriptText{std::move(text)},
              final, {}, {});
}

std::uint64_t AnnotationService::save_recording(const TaskId& task,
                                                const UtteranceId& u,
                                                const AnnotatorId& annotator,
                                                std::uint64_t revision,
                                                std::string_view wav,
                                                bool final) {
  PcmBuffer pcm;
  try {
    pcm = decode_audio(wav);
  } catch (const Error& e) {
    throw Error(Errc::UnsupportedMedia, e.what());
  }
  const std::string name = "rec_" + content_hash(wav).substr(0, 32) + ".wav";
  return save(task, u, annotator, revision,
              RecordingRef{"media/" + name, pcm.duration_s()}, final, wav, name);
}

void AnnotationService::skip(const TaskId& task, const UtteranceId& uid,
                             const AnnotatorId& annotator) {
  auto rt = runtime(task);
  std::lock_guard lock(rt->mu);
  const Timestamp now = options_.clock();
  rt->expire(now, options_.draft_grace);
  Utterance& u = rt->at(uid);
  auto lease = rt->leases.find(uid.str());
  if (lease == rt->leases.end() || lease->second.annotator_id != annotator) {
    throw Error(Errc::LeaseRequired,
                annotator.str() + " holds no lease on " + uid.str());
  }
  SkipRecord rec{uid, annotator, now};
  rt->store.append_skip(rec);
  rt->state.skips.push_back(rec);
  u.state = next_state(u.state, UtteranceEvent::SkipRequested);
  rt->leases.erase(lease);
  rt->activity[annotator] = now;
}

ProgressReport AnnotationService::progress(const TaskId& task) {
  auto rt = runtime(task);
  std::lock_guard lock(rt->mu);
  const Timestamp now = options_.clock();
  rt->expire(now, options_.draft_grace);
  ProgressReport p;
  p.total = rt->state.utterances.size();
  for (const auto& u : rt->state.utterances) {
    switch (u.state) {
      case UtteranceState::Pending: ++p.pending; break;
      case UtteranceState::Leased: ++p.leased; break;
      case UtteranceState::Annotated: ++p.annotated; break;
      case UtteranceState::Skipped: ++p.skipped; break;
    }
  }
  // Latest finalized record per utterance, later log position on ties.
  std::map<std::string, const AnnotationRecord*> final_of;
  for (const auto& r : rt->state.history) {
    if (!r.final) continue;
    auto& slot = final_of[r.utterance_id.str()];
    if (!slot || r.saved_at >= slot->saved_at) slot = &r;
  }
  double audio_s = 0.0;
  for (const auto& [id, r] : final_of) {
    const Utterance& u = rt->state.utterances[rt->index.at(id)];
    if (const auto* t = std::get_if<TranscriptText>(&r->content)) {
      p.words_collected += tokenize(t->text).size();
      if (u.is_audio()) audio_s += u.audio().duration_s;
    } else {
      audio_s += std::get<RecordingRef>(r->content).duration_s;
      if (!u.is_audio()) p.words_collected += u.text().tokens.size();
    }
  }
  p.audio_minutes_collected = audio_s / 60.0;
  for (const auto& [who, t] : rt->activity) {
    if (now - t < kActiveWindow) ++p.active_annotators_last_10min;
  }
  return p;
}

AudioFile AnnotationService::audio(const TaskId& task, const UtteranceId& uid) {
  auto rt = runtime(task);
  std::string media;
  {
    std::lock_guard lock(rt->mu);
    const Utterance& u = rt->at(uid);
    if (!u.is_audio()) {
      throw Error(Errc::UtteranceNotFound, uid.str() + " has no audio clip");
    }
    media = u.audio().media_file;
  }
  const std::string mp3 = "media/" + uid.str() + ".mp3";
  if (std::filesystem::is_regular_file(rt->store.dir() / mp3)) {
    return {rt->store.read_media(mp3), "audio/mpeg"};
  }
  return {rt->store.read_media(media), "audio/wav"};
}

ExportResult AnnotationService::export_task(const TaskId& task,
                                            bool exclude_skipped) {
  auto rt = runtime(task);
  TaskState snapshot = [&] {
    std::lock_guard lock(rt->mu);
    return rt->state;
  }();
  return export_archive(rt->store.dir(), snapshot,
                        ExportOptions{exclude_skipped, options_.clock()});
}

SessionStats AnnotationService::stats(const TaskId& task,
                                      std::chrono::minutes window,
                                      std::optional<Timestamp> end) {
  auto rt = runtime(task);
  std::vector<CollectionEvent> events;
  {
    std::lock_guard lock(rt->mu);
    events = collection_events(rt->state);
  }
  // A live window ends just after now so records saved this millisecond count.
  const Timestamp stop =
      end.value_or(options_.clock() + std::chrono::milliseconds(1));
  return compute_session_stats(events, stop - window, stop);
}

void AnnotationService::sweep() {
  std::vector<std::shared_ptr<Runtime>> all;
  {
    std::lock_guard lock(impl_->mu);
    for (const auto& [id, rt] : impl_->tasks) all.push_back(rt);
  }
  for (const auto& rt : all) {
    std::lock_guard lock(rt->mu);
    rt->expire(options_.clock(), options_.draft_grace);
  }
}

}  // namespace santlr
