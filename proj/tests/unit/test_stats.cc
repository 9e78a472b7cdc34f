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

#include "doctest.h"
#include "fixtures.hpp"
#include "santlr/errors.hpp"
#include "santlr/stats.hpp"

using namespace santlr;
using namespace santlr::testing;
using namespace std::chrono_literals;

namespace {

// `words` and `audio_s` spread evenly over `n` events inside [begin, begin + 1 h).
std::vector<CollectionEvent> spread(Timestamp begin, std::size_t n, std::size_t words,
                                    double audio_s) {
  std::vector<CollectionEvent> out;
  for (std::size_t i = 0; i < n; ++i) {
    CollectionEvent e;
    e.at = begin + std::chrono::duration_cast<Timestamp::duration>(
                       std::chrono::seconds(3600) * static_cast<long>(i) / static_cast<long>(n));
    e.words = words / n + (i < words % n ? 1 : 0);
    e.audio_s = audio_s / static_cast<double>(n);
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("hourly throughput rows") {
  const Timestamp begin = parse_utc("2026-03-01T10:00:00Z");
  const Timestamp end = begin + 1h;
  auto s = compute_session_stats(spread(begin, 48, 648, 576.0), begin, end);
  CHECK(s.words == 648);
  CHECK(s.words_per_hour == 648.0);
  CHECK(s.audio_minutes_per_hour == doctest::Approx(9.6).epsilon(1e-12));
  s = compute_session_stats(spread(begin, 87, 1044, 492.0), begin, end);
  CHECK(s.words_per_hour == 1044.0);
  CHECK(s.audio_minutes_per_hour == doctest::Approx(8.2).epsilon(1e-12));
}

TEST_CASE("window bounds and rescaling") {
  const Timestamp begin = parse_utc("2026-03-01T10:00:00Z");
  std::vector<CollectionEvent> ev = {{begin - 1s, 100, 60}, {begin, 10, 60},
                                     {begin + 29min, 10, 60}, {begin + 30min, 100, 60}};
  const auto s = compute_session_stats(ev, begin, begin + 30min);
  CHECK(s.words == 20);
  CHECK(s.window_hours == 0.5);
  CHECK(s.words_per_hour == 40.0);
  CHECK(s.audio_minutes_per_hour == doctest::Approx(4.0));
  const auto z = compute_session_stats({}, begin, begin + 1h);
  CHECK(z.words_per_hour == 0.0);
  CHECK(z.audio_minutes_per_hour == 0.0);
  try {
    compute_session_stats(ev, begin, begin);
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyWindow);
  }
}

TEST_CASE("events come from final records only") {
  IngestOptions opts;
  opts.mode = Mode::Record;
  auto p = prepare_task({text_upload("s.txt", {"one two three.", "four five."})}, opts);
  auto& st = p.state;
  const auto u0 = st.utterances[0].utterance_id.str();
  const auto u1 = st.utterances[1].utterance_id.str();
  AnnotationRecord rec = transcript(u0, "a", 1, "", true, parse_utc("2026-03-01T10:00:00Z"));
  rec.content = RecordingRef{"media/rec.wav", 2.5};
  st.history.push_back(rec);
  st.history.push_back(transcript(u1, "a", 1, "x", false));
  const auto ev = collection_events(st);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].words == 3);
  CHECK(ev[0].audio_s == 2.5);
}
