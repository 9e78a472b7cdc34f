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

#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "santlr/errors.hpp"
#include "santlr/ingest.hpp"

using namespace santlr;
using namespace santlr::testing;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("file kind check") {
  CHECK_NOTHROW(check_upload_kinds(Mode::Transcribe, {{"A.WAV", ""}}));
  CHECK_NOTHROW(check_upload_kinds(Mode::Record, {{"notes.txt", ""}}));
  CHECK(code_of([] { check_upload_kinds(Mode::Transcribe, {{"a.txt", ""}}); }) ==
        Errc::WrongFileKind);
  CHECK(code_of([] { check_upload_kinds(Mode::Record, {{"a.wav", ""}}); }) ==
        Errc::WrongFileKind);
  CHECK(code_of([] { check_upload_kinds(Mode::Record, {}); }) == Errc::WrongFileKind);
}

TEST_CASE("three bursts become three ranked clips") {
  IngestOptions opts;
  PcmBuffer pcm{{}, 16000};
  append_silence(pcm, 0.5);
  append_tone(pcm, 1.5, 440, 0.4);
  append_silence(pcm, 0.8);
  append_tone(pcm, 0.6, 880, 0.4);
  append_silence(pcm, 0.8);
  append_tone(pcm, 1.0, 1320, 0.4);
  append_silence(pcm, 0.5);
  const auto p = prepare_task({wav_upload("talk.wav", pcm)}, opts);
  REQUIRE(p.state.utterances.size() == 3);
  REQUIRE(p.state.queue.size() == 3);
  for (const auto& u : p.state.utterances) {
    REQUIRE(u.is_audio());
    CHECK(u.audio().duration_s > 0.0);
    CHECK(u.audio().snr_db.has_value());
    CHECK(u.audio().phonemes.has_value());
    CHECK(u.audio().source_file == "media/source_000.wav");
    CHECK(u.audio().media_file == "media/" + u.utterance_id.str() + ".wav");
  }
  CHECK(p.state.utterances[0].utterance_id.str() == "u000000");
  // Shortest first.
  CHECK(p.state.queue.entries[0].id == "u000001");
  CHECK(p.state.queue.entries[0].scores.base_score == 0.0);
  CHECK(p.state.utterances[1].priority_rank == 0);
  // Source and clip media are present.
  CHECK(p.media.size() == 4);
}

TEST_CASE("text upload becomes ranked sentences") {
  IngestOptions opts;
  opts.mode = Mode::Record;
  UploadFile f{"doc.txt",
               "<p>The cat sat.</p> The dog ran! Birds fly? "
               "\xf0\x9f\x98\x80 Fish swim. Cats nap.\n"};
  const auto p = prepare_task({f}, opts);
  REQUIRE(p.state.utterances.size() == 5);
  CHECK(p.state.utterances[0].text().tokens.size() == 3);
  for (const auto& u : p.state.utterances) {
    CHECK(!u.is_audio());
    CHECK(u.text().sentence.find('<') == std::string::npos);
    CHECK(u.text().perplexity_per_token.has_value());
    CHECK(*u.text().perplexity_per_token >= 1.0);
  }
}

TEST_CASE("ingest errors and warnings") {
  IngestOptions opts;
  CHECK(code_of([&] { prepare_task({{"x.txt", "hello."}}, opts); }) == Errc::WrongFileKind);
  CHECK(code_of([&] { prepare_task({wav_upload("quiet.wav", PcmBuffer{std::vector<float>(16000), 16000})}, opts); }) ==
        Errc::NoUtterances);
  CHECK(code_of([&] { prepare_task({{"bad.wav", "not a wav file at all"}}, opts); }) ==
        Errc::MalformedHeader);
  const auto p = prepare_task({UploadFile{"empty.wav", ""},
                               wav_upload("ok.wav", tone_bursts(2))},
                              opts);
  CHECK(p.state.utterances.size() == 2);
  REQUIRE(!p.warnings.empty());
  CHECK(p.warnings[0].find("empty.wav") != std::string::npos);
  opts.mode = Mode::Record;
  CHECK(code_of([&] { prepare_task({{"e.txt", "<b></b>"}}, opts); }) == Errc::NoUtterances);
}

TEST_CASE("progress callback reports steps") {
  IngestOptions opts;
  std::vector<std::string> steps;
  prepare_task({wav_upload("a.wav", tone_bursts(4))}, opts,
               [&](const std::string& step, std::size_t done, std::size_t total) {
                 CHECK(done <= total);
                 if (steps.empty() || steps.back() != step) steps.push_back(step);
               });
  CHECK(!steps.empty());
}

TEST_CASE("commit and rerank") {
  TempDir dir;
  IngestOptions opts;
  const TaskId id = ingest_task(dir.path(), {wav_upload("a.wav", tone_bursts(12))}, opts);
  const fs::path tdir = dir.path() / id.str();
  CHECK(fs::exists(tdir / "ranking.json"));
  auto cfg = opts.ranking;
  cfg.w_snr = 0.0;
  cfg.w_overlap = 0.0;
  const auto q1 = rerank_task(dir.path(), id, cfg);
  const std::string bytes1 = read_file(tdir / "queue.json");
  const std::string manifest1 = read_file(tdir / "manifest.json");
  const auto q2 = rerank_task(dir.path(), id, cfg);
  CHECK(q1 == q2);
  CHECK(read_file(tdir / "queue.json") == bytes1);
  CHECK(read_file(tdir / "manifest.json") == manifest1);

  // Zero weights: plain stable ascending-duration order.
  const auto state = TaskStore::load(dir.path(), id);
  CHECK(state.descriptor.config() == cfg);
  std::vector<std::size_t> expect(state.utterances.size());
  std::iota(expect.begin(), expect.end(), 0);
  std::stable_sort(expect.begin(), expect.end(), [&](std::size_t a, std::size_t b) {
    return state.utterances[a].audio().duration_s < state.utterances[b].audio().duration_s;
  });
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(state.queue.entries[i].input_index == expect[i]);
    CHECK(state.utterances[expect[i]].priority_rank == i);
  }

  auto writer = TaskStore::open(dir.path(), id);
  CHECK(code_of([&] { rerank_task(dir.path(), id, cfg); }) == Errc::LockBusy);
  CHECK_NOTHROW(rerank_task(writer, RankingConfig{}));
}

TEST_CASE("transcode hook") {
  TempDir dir;
  IngestOptions opts;
  opts.transcode_cmd = {"/bin/cp", "{in}", "{out}"};
  const TaskId id = ingest_task(dir.path(), {wav_upload("a.wav", tone_bursts(2))}, opts);
  const auto state = TaskStore::load(dir.path(), id);
  for (const auto& u : state.utterances) {
    CHECK(fs::exists(dir.path() / id.str() / "media" / (u.utterance_id.str() + ".mp3")));
  }
  opts.transcode_cmd = {"/bin/false"};
  CHECK(code_of([&] { ingest_task(dir.path(), {wav_upload("a.wav", tone_bursts(2))}, opts); }) ==
        Errc::ExternalCommandFailed);
  CHECK(TaskStore::list(dir.path()).size() == 1);
}

TEST_CASE("share path") {
  const auto d = new_task(Mode::Transcribe, RankingConfig{});
  CHECK(share_path(d) == "/t/" + d.task_id().str() + "?token=" + d.share_token());
}
