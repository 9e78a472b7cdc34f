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

#include "santlr/persistence.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>
#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json_codec.hpp"
#include "santlr/errors.hpp"
#include "santlr/zip_archive.hpp"

namespace santlr {
namespace {

using codec::json;

constexpr const char* kManifest = "manifest.json";
constexpr const char* kQueue = "queue.json";
constexpr const char* kRanking = "ranking.json";
constexpr const char* kLog = "annotations.log";
constexpr const char* kLock = ".lock";
constexpr const char* kMedia = "media";

[[noreturn]] void sys_fail(const std::string& what) {
  throw Error(Errc::StorageFailure, what + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view bytes, const std::string& what) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail(what);
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) sys_fail("open " + dir.string());
  const int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) sys_fail("fsync " + dir.string());
}

std::uint32_t crc_of(std::string_view s) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()),
            static_cast<uInt>(s.size())));
}

std::string frame(std::string_view payload) {
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc_of(payload));
  std::string line(hex, 8);
  line.push_back(' ');
  line.append(payload);
  line.push_back('\n');
  return line;
}

bool safe_relative(const std::string& rel) {
  if (rel.empty() || rel.front() == '/') return false;
  for (const auto& part : fs::path(rel)) {
    if (part == "..") return false;
  }
  return true;
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptManifest, path.filename().string() + ": " + e.what());
  }
}

json ranking_json(const RankedQueue& q) {
  json arr = json::array();
  for (std::size_t i = 0; i < q.entries.size(); ++i) {
    arr.push_back(codec::to_json(q.entries[i], i + 1));
  }
  return arr;
}

void write_state_files(const fs::path& dir, const TaskState& state) {
  write_file_atomic(dir / kManifest, codec::manifest_to_json(state).dump(2));
  write_file_atomic(dir / kQueue, codec::queue_to_json(state.queue).dump(2));
  write_file_atomic(dir / kRanking, ranking_json(state.queue).dump(2));
}

void apply_log(TaskState& s, const std::vector<std::string>& payloads) {
  for (const auto& p : payloads) {
    json j;
    try {
      j = json::parse(p);
    } catch (const json::exception& e) {
      throw Error(Errc::CorruptManifest, std::string("log record: ") + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "annotation") {
      auto r = codec::record_from_json(j);
      s.latest[{r.utterance_id, r.annotator_id}] = r;
      s.history.push_back(std::move(r));
    } else if (type == "skip") {
      s.skips.push_back(codec::skip_from_json(j));
    } else {
      throw Error(Errc::CorruptManifest, "unknown log record type " + type);
    }
  }
}

void derive_states(TaskState& s) {
  std::set<std::string> finals;
  std::set<std::string> skipped;
  for (const auto& r : s.history) {
    if (r.final) finals.insert(r.utterance_id.str());
  }
  for (const auto& k : s.skips) skipped.insert(k.utterance_id.str());
  for (auto& u : s.utterances) {
    const auto& id = u.utterance_id.str();
    if (finals.count(id)) {
      u.state = UtteranceState::Annotated;
    } else if (skipped.count(id)) {
      u.state = UtteranceState::Skipped;
    } else {
      u.state = UtteranceState::Pending;
    }
  }
}

void apply_queue(TaskState& s) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < s.queue.entries.size(); ++i) {
    rank[s.queue.entries[i].id] = i;
  }
  for (auto& u : s.utterances) {
    auto it = rank.find(u.utterance_id.str());
    if (it == rank.end()) {
      throw Error(Errc::CorruptManifest,
                  "utterance missing from queue: " + u.utterance_id.str());
    }
    u.priority_rank = it->second;
    u.scores = s.queue.entries[it->second].scores;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---- TaskState --------------------------------------------------------------

const Utterance* TaskState::find(const UtteranceId& id) const {
  for (const auto& u : utterances) {
    if (u.utterance_id == id) return &u;
  }
  return nullptr;
}

const AnnotationRecord* TaskState::latest_final(const UtteranceId& id) const {
  const AnnotationRecord* best = nullptr;
  for (const auto& r : history) {
    if (!r.final || r.utterance_id != id) continue;
    if (!best || r.saved_at >= best->saved_at) best = &r;
  }
  return best;
}

// ---- files ------------------------------------------------------------------

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  std::string tmpl = (path.parent_path() / ("." + path.filename().string() +
                                            ".tmp-XXXXXX"))
                         .string();
  const int fd = ::mkstemp(tmpl.data());
  if (fd < 0) sys_fail("create temp for " + path.string());
  try {
    write_all(fd, bytes, "write " + tmpl);
    if (::fsync(fd) != 0) sys_fail("fsync " + tmpl);
  } catch (...) {
    ::close(fd);
    ::unlink(tmpl.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmpl.c_str(), path.c_str()) != 0) {
    ::unlink(tmpl.c_str());
    sys_fail("rename to " + path.string());
  }
  fsync_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::StorageFailure, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::string content_hash(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::StorageFailure, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

// ---- AppendLog --------------------------------------------------------------

AppendLog::AppendLog(const fs::path& path) {
  std::uint64_t valid = 0;
  if (fs::exists(path)) replay(path, &valid);
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) sys_fail("open " + path.string());
  struct stat st {};
  if (::fstat(fd_, &st) != 0) sys_fail("stat " + path.string());
  if (static_cast<std::uint64_t>(st.st_size) > valid) {
    if (::ftruncate(fd_, static_cast<off_t>(valid)) != 0 || ::fsync(fd_) != 0) {
      const int saved = errno;
      ::close(fd_);
      fd_ = -1;
      errno = saved;
      sys_fail("truncate torn tail of " + path.string());
    }
  }
}

AppendLog::~AppendLog() {
  if (fd_ >= 0) ::close(fd_);
}

AppendLog::AppendLog(AppendLog&& other) noexcept : fd_(other.fd_) {
  other.fd_ = -1;
}

AppendLog& AppendLog::operator=(AppendLog&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void AppendLog::append(std::string_view payload) {
  if (payload.find('\n') != std::string_view::npos) {
    throw Error(Errc::InvalidArgument, "log payload contains a newline");
  }
  write_all(fd_, frame(payload), "append to log");
  if (::fdatasync(fd_) != 0) sys_fail("fsync log");
}

std::vector<std::string> AppendLog::replay(const fs::path& path,
                                           std::uint64_t* valid_bytes) {
  std::vector<std::string> out;
  std::string data;
  if (fs::exists(path)) data = read_file(path);
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) break;
    std::string_view line(data.data() + pos, nl - pos);
    if (line.size() < 9 || line[8] != ' ') break;
    std::uint32_t crc = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + 8, crc, 16);
    if (ec != std::errc() || ptr != line.data() + 8) break;
    std::string_view payload = line.substr(9);
    if (crc_of(payload) != crc) break;
    out.emplace_back(payload);
    pos = nl + 1;
  }
  if (valid_bytes) *valid_bytes = pos;
  return out;
}

// ---- TaskStore --------------------------------------------------------------

TaskStore::TaskStore(fs::path dir, TaskId id, int lock_fd)
    : dir_(std::move(dir)), id_(std::move(id)), lock_fd_(lock_fd) {}

TaskStore::TaskStore(TaskStore&& o) noexcept
    : dir_(std::move(o.dir_)),
      id_(std::move(o.id_)),
      lock_fd_(o.lock_fd_),
      log_(std::move(o.log_)),
      latest_(std::move(o.latest_)),
      utterance_ids_(std::move(o.utterance_ids_)) {
  o.lock_fd_ = -1;
}

TaskStore& TaskStore::operator=(TaskStore&& o) noexcept {
  if (this != &o) {
    if (lock_fd_ >= 0) ::close(lock_fd_);
    dir_ = std::move(o.dir_);
    id_ = std::move(o.id_);
    lock_fd_ = o.lock_fd_;
    log_ = std::move(o.log_);
    latest_ = std::move(o.latest_);
    utterance_ids_ = std::move(o.utterance_ids_);
    o.lock_fd_ = -1;
  }
  return *this;
}

TaskStore::~TaskStore() {
  log_.reset();
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

bool TaskStore::exists(const fs::path& data_dir, const TaskId& id) {
  if (id.empty() || !safe_relative(id.str()) ||
      id.str().find('/') != std::string::npos || id.str().front() == '.') {
    return false;
  }
  return fs::is_regular_file(data_dir / id.str() / kManifest);
}

std::vector<TaskId> TaskStore::list(const fs::path& data_dir) {
  std::vector<TaskId> ids;
  std::error_code ec;
  if (!fs::is_directory(data_dir, ec)) return ids;
  for (const auto& e : fs::directory_iterator(data_dir)) {
    const auto name = e.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    if (fs::is_regular_file(e.path() / kManifest)) ids.emplace_back(name);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

TaskStore TaskStore::create(const fs::path& data_dir, const TaskState& initial,
                            const std::vector<MediaFile>& media,
                            const StagingHook& before_commit) {
  const std::string& id = initial.descriptor.task_id().str();
  if (id.empty() || id.front() == '.' || id.find('/') != std::string::npos) {
    throw Error(Errc::InvalidArgument, "invalid task id");
  }
  std::error_code ec;
  fs::create_directories(data_dir, ec);
  if (ec) throw Error(Errc::StorageFailure, "create " + data_dir.string() + ": " + ec.message());
  const fs::path final_dir = data_dir / id;
  if (fs::exists(final_dir)) {
    throw Error(Errc::InvalidArgument, "task already exists: " + id);
  }
  const fs::path staging = data_dir / (".staging-" + id);
  fs::remove_all(staging, ec);
  try {
    fs::create_directories(staging / kMedia);
    for (const auto& m : media) {
      if (!safe_relative(m.name) || m.name.find('/') != std::string::npos) {
        throw Error(Errc::InvalidArgument, "invalid media name " + m.name);
      }
      write_file_atomic(staging / kMedia / m.name, m.bytes);
    }
    write_state_files(staging, initial);
    write_file_atomic(staging / kLog, "");
    write_file_atomic(staging / kLock, "");
    if (before_commit) before_commit(staging);
    fsync_dir(staging / kMedia);
    fsync_dir(staging);
    if (::rename(staging.c_str(), final_dir.c_str()) != 0) {
      sys_fail("commit task " + id);
    }
    fsync_dir(data_dir);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  return open(data_dir, initial.descriptor.task_id());
}

TaskStore TaskStore::open(const fs::path& data_dir, const TaskId& id) {
  if (!exists(data_dir, id)) {
    throw Error(Errc::TaskNotFound, "no such task: " + id.str());
  }
  const fs::path dir = data_dir / id.str();
  const int fd = ::open((dir / kLock).c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) sys_fail("open lock");
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    const int saved = errno;
    ::close(fd);
    if (saved == EWOULDBLOCK) {
      throw Error(Errc::LockBusy, "task " + id.str() + " is open by another writer");
    }
    errno = saved;
    sys_fail("lock task " + id.str());
  }
  TaskStore store(dir, id, fd);
  store.log_.emplace(dir / kLog);
  const TaskState s = store.load();
  store.latest_ = s.latest;
  for (const auto& u : s.utterances) store.utterance_ids_.insert(u.utterance_id.str());
  return store;
}

TaskState TaskStore::load(const fs::path& data_dir, const TaskId& id) {
  if (!exists(data_dir, id)) {
    throw Error(Errc::TaskNotFound, "no such task: " + id.str());
  }
  const fs::path dir = data_dir / id.str();
  TaskState s = codec::manifest_from_json(parse_json_file(dir / kManifest));
  if (s.descriptor.task_id() != id) {
    throw Error(Errc::CorruptManifest, "manifest task id mismatch");
  }
  s.queue = codec::queue_from_json(parse_json_file(dir / kQueue));
  apply_queue(s);
  apply_log(s, AppendLog::replay(dir / kLog));
  derive_states(s);
  return s;
}

TaskState TaskStore::load() const {
  return load(dir_.parent_path(), id_);
}

std::uint64_t TaskStore::latest_revision(const UtteranceId& u,
                                         const AnnotatorId& a) const {
  auto it = latest_.find({u, a});
  return it == latest_.end() ? 0 : it->second.revision;
}

std::uint64_t TaskStore::append_annotation(const AnnotationRecord& record) {
  if (!utterance_ids_.count(record.utterance_id.str())) {
    throw Error(Errc::InvalidArgument,
                "unknown utterance " + record.utterance_id.str());
  }
  if (record.annotator_id.empty()) {
    throw Error(Errc::InvalidArgument, "annotator_id is required");
  }
  const RecordKey key{record.utterance_id, record.annotator_id};
  auto it = latest_.find(key);
  const std::uint64_t current = it == latest_.end() ? 0 : it->second.revision;
  if (it != latest_.end() && record.revision == current &&
      record.content == it->second.content && record.final == it->second.final) {
    return current;
  }
  if (record.revision != current + 1) {
    throw StaleRevisionError(current + 1, record.revision);
  }
  log_->append(codec::log_record(record).dump());
  latest_[key] = record;
  return record.revision;
}

void TaskStore::append_skip(const SkipRecord& skip) {
  if (!utterance_ids_.count(skip.utterance_id.str())) {
    throw Error(Errc::InvalidArgument,
                "unknown utterance " + skip.utterance_id.str());
  }
  log_->append(codec::log_record(skip).dump());
}

void TaskStore::write_ranking(const TaskState& state) {
  if (state.descriptor.task_id() != id_) {
    throw Error(Errc::InvalidArgument, "state belongs to another task");
  }
  write_state_files(dir_, state);
}

std::string TaskStore::put_media(const std::string& name,
                                 std::string_view bytes) {
  if (!safe_relative(name) || name.find('/') != std::string::npos) {
    throw Error(Errc::InvalidArgument, "invalid media name " + name);
  }
  const fs::path path = dir_ / kMedia / name;
  if (!fs::exists(path)) write_file_atomic(path, bytes);
  return std::string(kMedia) + "/" + name;
}

std::string TaskStore::read_media(const std::string& relative_path) const {
  if (!safe_relative(relative_path)) {
    throw Error(Errc::InvalidArgument, "invalid media path " + relative_path);
  }
  return read_file(dir_ / relative_path);
}

// ---- TSV --------------------------------------------------------------------

std::string escape_tsv_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_tsv_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 1 == text.size()) {
      throw Error(Errc::InvalidArgument, "dangling escape in TSV field");
    }
    switch (text[++i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default:
        throw Error(Errc::InvalidArgument, "unknown escape in TSV field");
    }
  }
  return out;
}

namespace {
constexpr std::string_view kTsvHeader =
    "utterance_id\ttext\tduration_s\tannotator_id";
}

std::string write_transcripts_tsv(const std::vector<TranscriptRow>& rows) {
  std::string out(kTsvHeader);
  out.push_back('\n');
  for (const auto& r : rows) {
    out += escape_tsv_field(r.utterance_id);
    out.push_back('\t');
    out += escape_tsv_field(r.text);
    out.push_back('\t');
    out += format_double(r.duration_s);
    out.push_back('\t');
    out += escape_tsv_field(r.annotator_id);
    out.push_back('\n');
  }
  return out;
}

std::vector<TranscriptRow> parse_transcripts_tsv(std::string_view tsv) {
  std::vector<TranscriptRow> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < tsv.size()) {
    std::size_t nl = tsv.find('\n', pos);
    if (nl == std::string_view::npos) nl = tsv.size();
    std::string_view line = tsv.substr(pos, nl - pos);
    pos = nl + 1;
    if (header) {
      if (line != kTsvHeader) {
        throw Error(Errc::InvalidArgument, "unexpected TSV header");
      }
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t s = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', s);
      f.push_back(line.substr(s, tab == std::string_view::npos ? tab : tab - s));
      if (tab == std::string_view::npos) break;
      s = tab + 1;
    }
    if (f.size() != 4) {
      throw Error(Errc::InvalidArgument, "TSV row must have 4 fields");
    }
    TranscriptRow r;
    r.utterance_id = unescape_tsv_field(f[0]);
    r.text = unescape_tsv_field(f[1]);
    auto [ptr, ec] =
        std::from_chars(f[2].data(), f[2].data() + f[2].size(), r.duration_s);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) {
      throw Error(Errc::InvalidArgument, "bad duration in TSV row");
    }
    r.annotator_id = unescape_tsv_field(f[3]);
    rows.push_back(std::move(r));
  }
  if (header) throw Error(Errc::InvalidArgument, "empty TSV");
  return rows;
}

// ---- export -----------------------------------------------------------------

ExportResult export_archive(const fs::path& task_dir, const TaskState& state,
                            const ExportOptions& options) {
  ExportResult result;
  std::vector<TranscriptRow> rows;
  std::vector<std::pair<std::string, std::string>> audio;
  std::size_t skipped = 0;
  const bool record_mode = state.descriptor.mode() == Mode::Record;
  for (const auto& u : state.utterances) {
    if (u.state == UtteranceState::Skipped) ++skipped;
    const AnnotationRecord* r = state.latest_final(u.utterance_id);
    if (!r) continue;
    TranscriptRow row;
    row.utterance_id = u.utterance_id.str();
    row.annotator_id = r->annotator_id.str();
    std::string media;
    if (record_mode) {
      const auto* rec = std::get_if<RecordingRef>(&r->content);
      if (!rec || u.is_audio()) {
        result.warnings.push_back("MismatchedRecord: " + row.utterance_id);
        continue;
      }
      row.text = u.text().sentence;
      row.duration_s = rec->duration_s;
      media = rec->path;
    } else {
      const auto* t = std::get_if<TranscriptText>(&r->content);
      if (!t || !u.is_audio()) {
        result.warnings.push_back("MismatchedRecord: " + row.utterance_id);
        continue;
      }
      row.text = t->text;
      row.duration_s = u.audio().duration_s;
      media = u.audio().media_file;
    }
    if (!safe_relative(media)) {
      throw Error(Errc::CorruptManifest, "invalid media path " + media);
    }
    audio.emplace_back("audio/" + row.utterance_id + ".wav",
                       read_file(task_dir / media));
    rows.push_back(std::move(row));
  }
  result.items = rows.size();
  const std::size_t total = state.utterances.size();
  const std::size_t eligible = options.exclude_skipped ? total - skipped : total;
  json meta = {
      {"schema", kManifestSchema},
      {"task", codec::to_json(state.descriptor, false)},
      {"config", codec::to_json(state.descriptor.config())},
      {"exported_at", format_utc(options.exported_at)},
      {"counts",
       {{"utterances", total},
        {"annotated", rows.size()},
        {"skipped", skipped},
        {"eligible", eligible},
        {"completion", eligible == 0 ? 0.0
                                     : static_cast<double>(rows.size()) /
                                           static_cast<double>(eligible)}}},
      {"exclude_skipped", options.exclude_skipped}};
  ZipWriter zip(options.exported_at);
  zip.add("meta.json", meta.dump(2));
  if (rows.empty()) {
    result.warnings.push_back("NothingAnnotated: no finalized annotations");
  } else {
    zip.add("transcripts.tsv", write_transcripts_tsv(rows));
    for (const auto& [name, bytes] : audio) zip.add(name, bytes);
  }
  result.archive = zip.finish();
  return result;
}

}  // namespace santlr
