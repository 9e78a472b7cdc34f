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

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "santlr/errors.hpp"
#include "santlr/persistence.hpp"
#include "santlr/zip_archive.hpp"

using namespace santlr;
using namespace santlr::testing;

namespace {

IngestOptions record_options() {
  IngestOptions o;
  o.mode = Mode::Record;
  o.created_at = parse_utc("2026-01-02T03:04:05Z");
  return o;
}

PreparedTask small_text_task() {
  return prepare_task({text_upload("s.txt", {"One sentence here.", "Another one there.",
                                             "And a third."})},
                      record_options());
}

}  // namespace

TEST_CASE("create, load and list") {
  TempDir dir;
  const auto prepared = small_text_task();
  const TaskId id = prepared.state.descriptor.task_id();
  {
    auto store = TaskStore::create(dir.path(), prepared.state, prepared.media);
    CHECK(store.task_id() == id);
    CHECK(fs::exists(store.dir() / "manifest.json"));
    CHECK(fs::exists(store.dir() / "queue.json"));
    CHECK(fs::exists(store.dir() / "annotations.log"));
    CHECK(store.load() == prepared.state);
  }
  CHECK(TaskStore::exists(dir.path(), id));
  CHECK(TaskStore::list(dir.path()) == std::vector<TaskId>{id});
  CHECK(TaskStore::load(dir.path(), id) == prepared.state);
  CHECK_THROWS_AS(TaskStore::load(dir.path(), TaskId("missing")), Error);
}

TEST_CASE("failed staging leaves nothing behind") {
  TempDir dir;
  const auto prepared = small_text_task();
  CHECK_THROWS(TaskStore::create(dir.path(), prepared.state, prepared.media,
                                 [](const fs::path&) { throw Error(Errc::ExternalCommandFailed, "x"); }));
  CHECK(TaskStore::list(dir.path()).empty());
  CHECK(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator{}) == 0);
}

TEST_CASE("writer lock is exclusive") {
  TempDir dir;
  const auto prepared = small_text_task();
  const TaskId id = prepared.state.descriptor.task_id();
  auto store = TaskStore::create(dir.path(), prepared.state, prepared.media);
  try {
    TaskStore::open(dir.path(), id);
    FAIL("expected LockBusy");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::LockBusy);
  }
  CHECK_NOTHROW(TaskStore::load(dir.path(), id));
}

TEST_CASE("annotation revisions") {
  TempDir dir;
  const auto prepared = small_text_task();
  const TaskId id = prepared.state.descriptor.task_id();
  const std::string u = prepared.state.utterances[0].utterance_id.str();
  {
    auto store = TaskStore::create(dir.path(), prepared.state, prepared.media);
    CHECK(store.append_annotation(transcript(u, "ann", 1, "draft", false)) == 1);
    CHECK(store.append_annotation(transcript(u, "ann", 2, "better", false)) == 2);
    try {
      store.append_annotation(transcript(u, "ann", 2, "different", false));
      FAIL("expected StaleRevision");
    } catch (const StaleRevisionError& e) {
      CHECK(e.expected() == 3);
      CHECK(e.got() == 2);
    }
    CHECK_THROWS_AS(store.append_annotation(transcript(u, "ann", 5, "gap", false)),
                    StaleRevisionError);
    // Identical retry is acknowledged without a second record.
    const auto again = transcript(u, "ann", 3, "done", true);
    CHECK(store.append_annotation(again) == 3);
    CHECK(store.append_annotation(again) == 3);
    CHECK(store.latest_revision(UtteranceId(u), AnnotatorId("ann")) == 3);
    CHECK(store.latest_revision(UtteranceId(u), AnnotatorId("other")) == 0);
    CHECK(store.append_annotation(transcript(u, "other", 1, "mine", true)) == 1);
    CHECK_THROWS_AS(store.append_annotation(transcript("nope", "ann", 1, "x", false)), Error);
  }
  const auto state = TaskStore::load(dir.path(), id);
  CHECK(state.history.size() == 4);
  CHECK(state.find(UtteranceId(u))->state == UtteranceState::Annotated);
  CHECK(state.latest.at({UtteranceId(u), AnnotatorId("ann")}).revision == 3);
  // Reopening restores the revision counters.
  auto store = TaskStore::open(dir.path(), id);
  CHECK(store.latest_revision(UtteranceId(u), AnnotatorId("ann")) == 3);
  CHECK_THROWS_AS(store.append_annotation(transcript(u, "ann", 3, "changed", true)),
                  StaleRevisionError);
}

TEST_CASE("skips replay as Skipped") {
  TempDir dir;
  const auto prepared = small_text_task();
  const TaskId id = prepared.state.descriptor.task_id();
  const auto u = prepared.state.utterances[1].utterance_id;
  {
    auto store = TaskStore::create(dir.path(), prepared.state, prepared.media);
    store.append_skip(SkipRecord{u, AnnotatorId("ann"), now_utc()});
  }
  const auto state = TaskStore::load(dir.path(), id);
  CHECK(state.skips.size() == 1);
  CHECK(state.find(u)->state == UtteranceState::Skipped);
  CHECK(state.find(prepared.state.utterances[0].utterance_id)->state == UtteranceState::Pending);
}

TEST_CASE("torn tail is discarded") {
  TempDir dir;
  const auto prepared = small_text_task();
  const TaskId id = prepared.state.descriptor.task_id();
  const std::string u = prepared.state.utterances[0].utterance_id.str();
  fs::path log;
  {
    auto store = TaskStore::create(dir.path(), prepared.state, prepared.media);
    store.append_annotation(transcript(u, "ann", 1, "kept", false));
    log = store.dir() / "annotations.log";
  }
  const auto clean_size = fs::file_size(log);
  {
    std::ofstream out(log, std::ios::app | std::ios::binary);
    out << "deadbeef {\"type\":\"annotation\",\"tor";
  }
  std::uint64_t valid = 0;
  CHECK(AppendLog::replay(log, &valid).size() == 1);
  CHECK(valid == clean_size);
  CHECK(TaskStore::load(dir.path(), id).history.size() == 1);
  {
    auto store = TaskStore::open(dir.path(), id);
    CHECK(store.append_annotation(transcript(u, "ann", 2, "next", false)) == 2);
  }
  const auto state = TaskStore::load(dir.path(), id);
  CHECK(state.history.size() == 2);
  CHECK(std::get<TranscriptText>(state.history[1].content).text == "next");

  // A flipped byte in a complete record stops replay at that record.
  std::string bytes = read_file(log);
  bytes[bytes.size() - 5] ^= 0x01;
  write_file_atomic(log, bytes);
  CHECK(AppendLog::replay(log).size() == 1);
}

TEST_CASE("media is content addressed and confined") {
  TempDir dir;
  const auto prepared = small_text_task();
  auto store = TaskStore::create(dir.path(), prepared.state, prepared.media);
  const std::string rel = store.put_media("x.bin", "hello");
  CHECK(rel == "media/x.bin");
  CHECK(store.read_media(rel) == "hello");
  CHECK(store.put_media("x.bin", "other") == rel);
  CHECK(store.read_media(rel) == "hello");
  CHECK_THROWS(store.read_media("../manifest.json"));
  CHECK(content_hash("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("tsv escaping round trips") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const std::string s = random_transcript(rng);
    const std::string e = escape_tsv_field(s);
    CHECK(e.find('\t') == std::string::npos);
    CHECK(e.find('\n') == std::string::npos);
    CHECK(e.find('\r') == std::string::npos);
    CHECK(unescape_tsv_field(e) == s);
  }
  CHECK(escape_tsv_field("a\tb\\n") == "a\\tb\\\\n");
  const std::vector<TranscriptRow> rows = {{"u000000", "x\ty", 1.25, "ann"},
                                           {"u000001", "", 2.0, "b"}};
  const std::string tsv = write_transcripts_tsv(rows);
  CHECK(tsv.rfind("utterance_id\ttext\tduration_s\tannotator_id\n", 0) == 0);
  CHECK(parse_transcripts_tsv(tsv) == rows);
  CHECK_THROWS_AS(parse_transcripts_tsv("bad header\n"), Error);
  CHECK_THROWS_AS(parse_transcripts_tsv("utterance_id\ttext\tduration_s\tannotator_id\nonly\n"),
                  Error);
}

TEST_CASE("zip round trip") {
  ZipWriter w(parse_utc("2026-05-06T07:08:10Z"));
  w.add("a.txt", "alpha");
  w.add("dir/\xc3\xa9.bin", std::string("\0\1\2", 3));
  const std::string z = w.finish();
  const auto entries = read_zip(z);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].name == "a.txt");
  CHECK(entries[0].data == "alpha");
  CHECK(entries[1].data == std::string("\0\1\2", 3));
  std::string bad = z;
  bad[30 + 5 + 1] ^= 0x40;  // inside the first payload
  CHECK_THROWS_AS(read_zip(bad), Error);
  CHECK_THROWS_AS(read_zip("PK"), Error);
}

TEST_CASE("export archive") {
  TempDir dir;
  IngestOptions opts;
  opts.created_at = parse_utc("2026-01-02T03:04:05Z");
  const auto prepared = prepare_task({wav_upload("a.wav", tone_bursts(3))}, opts);
  REQUIRE(prepared.state.utterances.size() == 3);
  const TaskId id = prepared.state.descriptor.task_id();
  auto store = TaskStore::create(dir.path(), prepared.state, prepared.media);

  auto result = export_archive(store.dir(), store.load());
  CHECK(result.items == 0);
  REQUIRE(result.warnings.size() == 1);
  CHECK(result.warnings[0].rfind("NothingAnnotated", 0) == 0);
  auto entries = read_zip(result.archive);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].name == "meta.json");
  CHECK(entries[0].data.find(prepared.state.descriptor.admin_token()) == std::string::npos);

  const auto& us = prepared.state.utterances;
  store.append_annotation(transcript(us[0].utterance_id.str(), "a", 1, "first\tline", true));
  store.append_annotation(transcript(us[1].utterance_id.str(), "a", 1, "draft only", false));
  store.append_skip(SkipRecord{us[2].utterance_id, AnnotatorId("a"), now_utc()});
  ExportOptions eo;
  eo.exclude_skipped = true;
  result = export_archive(store.dir(), store.load(), eo);
  CHECK(result.items == 1);
  CHECK(result.warnings.empty());
  entries = read_zip(result.archive);
  std::map<std::string, std::string> byname;
  for (auto& e : entries) byname[e.name] = e.data;
  REQUIRE(byname.count("transcripts.tsv"));
  const auto rows = parse_transcripts_tsv(byname["transcripts.tsv"]);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].text == "first\tline");
  CHECK(rows[0].utterance_id == us[0].utterance_id.str());
  CHECK(rows[0].duration_s == doctest::Approx(us[0].audio().duration_s));
  const std::string wav = "audio/" + us[0].utterance_id.str() + ".wav";
  REQUIRE(byname.count(wav));
  CHECK(byname[wav] == store.read_media(us[0].audio().media_file));
  CHECK(byname["meta.json"].find("\"eligible\": 2") != std::string::npos);
  CHECK(byname["meta.json"].find("\"skipped\": 1") != std::string::npos);
  (void)id;
}
