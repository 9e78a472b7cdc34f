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

// Collection throughput over a wall-clock window.

#pragma once

#include <cstddef>
#include <vector>

#include "santlr/model.hpp"
#include "santlr/persistence.hpp"

namespace santlr {

struct CollectionEvent {
  Timestamp at{};
  std::size_t words = 0;
  double audio_s = 0.0;
};

struct SessionStats {
  std::size_t words = 0;
  double audio_minutes = 0.0;
  double window_hours = 0.0;
  double words_per_hour = 0.0;
  double audio_minutes_per_hour = 0.0;
};

// Counts events with begin <= at < end. Error EmptyWindow if end <= begin.
SessionStats compute_session_stats(const std::vector<CollectionEvent>& events,
                                   Timestamp begin, Timestamp end);

// One event per finalized annotation record: transcript tokens and clip
// duration (Transcribe), or sentence tokens and recording duration (Record).
std::vector<CollectionEvent> collection_events(const TaskState& state);

}  // namespace santlr
