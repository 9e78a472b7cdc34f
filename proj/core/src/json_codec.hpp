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

// JSON forms of the domain types. Internal to the santlr libraries; the
// on-disk and wire schemas are documented in README.md.

#pragma once

#include <string>

#include "json.hpp"
#include "santlr/model.hpp"
#include "santlr/persistence.hpp"
#include "santlr/ranking.hpp"

namespace santlr::codec {

using nlohmann::json;

json to_json(const RankingConfig& cfg);
RankingConfig ranking_config_from_json(const json& j);

// include_admin=false strips the admin token (export metadata, public views).
json to_json(const TaskDescriptor& d, bool include_admin = true);
TaskDescriptor descriptor_from_json(const json& j);

json to_json(const ScoreBreakdown& s);
ScoreBreakdown scores_from_json(const json& j);

json to_json(const Utterance& u);
Utterance utterance_from_json(const json& j);

json to_json(const AnnotationRecord& r);
AnnotationRecord record_from_json(const json& j);

json to_json(const SkipRecord& r);
SkipRecord skip_from_json(const json& j);

// One entry of ranking.json / queue.json.
json to_json(const RankedEntry& e, std::size_t rank);
RankedEntry ranked_entry_from_json(const json& j);

json queue_to_json(const RankedQueue& q);
RankedQueue queue_from_json(const json& j);

// manifest.json: descriptor, utterances and symbol table.
json manifest_to_json(const TaskState& s);
// Fills descriptor, utterances and symbol_table; throws CorruptManifest.
TaskState manifest_from_json(const json& j);

// Log records carry a "type" of "annotation" or "skip".
json log_record(const AnnotationRecord& r);
json log_record(const SkipRecord& r);

}  // namespace santlr::codec
