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

#include "santlr/stats.hpp"

#include <chrono>

#include "santlr/errors.hpp"
#include "santlr/text.hpp"

namespace santlr {

SessionStats compute_session_stats(const std::vector<CollectionEvent>& events,
                                   Timestamp begin, Timestamp end) {
  if (end <= begin) {
    throw Error(Errc::EmptyWindow, "window end must be after its begin");
  }
  SessionStats s;
  double audio_s = 0.0;
  for (const auto& e : events) {
    if (e.at < begin || e.at >= end) continue;
    s.words += e.words;
    audio_s += e.audio_s;
  }
  s.audio_minutes = audio_s / 60.0;
  s.window_hours = std::chrono::duration<double, std::ratio<3600>>(end - begin).count();
  s.words_per_hour = static_cast<double>(s.words) / s.window_hours;
  s.audio_minutes_per_hour = s.audio_minutes / s.window_hours;
  return s;
}

std::vector<CollectionEvent> collection_events(const TaskState& state) {
  std::vector<CollectionEvent> out;
  for (const auto& r : state.history) {
    if (!r.final) continue;
    const Utterance* u = state.find(r.utterance_id);
    if (!u) continue;
    CollectionEvent e;
    e.at = r.saved_at;
    if (const auto* t = std::get_if<TranscriptText>(&r.content)) {
      e.words = tokenize(t->text).size();
      if (u->is_audio()) e.audio_s = u->audio().duration_s;
    } else {
      const auto& rec = std::get<RecordingRef>(r.content);
      e.audio_s = rec.duration_s;
      if (!u->is_audio()) e.words = u->text().tokens.size();
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace santlr
