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

#include <string>
#include <utility>

#include "json_codec.hpp"
#include "santlr/errors.hpp"

namespace santlr::codec {
namespace {

template <typename T>
T get(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(Errc::CorruptManifest, std::string("missing field ") + key);
  }
  return it->get<T>();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptManifest, e.what());
  }
}

UtteranceState parse_state(const std::string& s) {
  for (auto st : {UtteranceState::Pending, UtteranceState::Leased,
                  UtteranceState::Annotated, UtteranceState::Skipped}) {
    if (to_string(st) == s) return st;
  }
  throw Error(Errc::CorruptManifest, "unknown state " + s);
}

}  // namespace

json to_json(const RankingConfig& cfg) {
  return {{"w_snr", cfg.w_snr},
          {"w_overlap", cfg.w_overlap},
          {"snr_target_db", cfg.snr_target_db},
          {"overlap_threshold", cfg.overlap_threshold},
          {"lm_order", cfg.lm_order},
          {"lm_add_k", cfg.lm_add_k},
          {"text_dup_threshold", cfg.text_dup_threshold}};
}

RankingConfig ranking_config_from_json(const json& j) {
  if (!j.is_object()) {
    throw Error(Errc::InvalidArgument, "ranking config must be an object");
  }
  RankingConfig cfg;
  try {
    cfg.w_snr = get_or(j, "w_snr", cfg.w_snr);
    cfg.w_overlap = get_or(j, "w_overlap", cfg.w_overlap);
    cfg.snr_target_db = get_or(j, "snr_target_db", cfg.snr_target_db);
    cfg.overlap_threshold =
        get_or(j, "overlap_threshold", cfg.overlap_threshold);
    cfg.lm_order = get_or(j, "lm_order", cfg.lm_order);
    cfg.lm_add_k = get_or(j, "lm_add_k", cfg.lm_add_k);
    cfg.text_dup_threshold =
        get_or(j, "text_dup_threshold", cfg.text_dup_threshold);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("ranking config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const TaskDescriptor& d, bool include_admin) {
  json j = {{"task_id", d.task_id().str()},
            {"mode", std::string(to_string(d.mode()))},
            {"share_token", d.share_token()},
            {"created_at", format_utc(d.created_at())},
            {"language_tag", d.language_tag()},
            {"config", to_json(d.config())}};
  if (include_admin) j["admin_token"] = d.admin_token();
  return j;
}

TaskDescriptor descriptor_from_json(const json& j) {
  return guarded([&] {
    return TaskDescriptor(TaskId(get<std::string>(j, "task_id")),
                          parse_mode(get<std::string>(j, "mode")),
                          get<std::string>(j, "share_token"),
                          get<std::string>(j, "admin_token"),
                          parse_utc(get<std::string>(j, "created_at")),
                          get_or<std::string>(j, "language_tag", ""),
                          ranking_config_from_json(j.at("config")));
  });
}

json to_json(const ScoreBreakdown& s) {
  return {{"base_raw", s.base_raw},
          {"base_score", s.base_score},
          {"snr_penalty", s.snr_penalty},
          {"overlap_penalty", s.overlap_penalty},
          {"final_score", s.final_score}};
}

ScoreBreakdown scores_from_json(const json& j) {
  return guarded([&] {
    ScoreBreakdown s;
    s.base_raw = get<double>(j, "base_raw");
    s.base_score = get<double>(j, "base_score");
    s.snr_penalty = get<double>(j, "snr_penalty");
    s.overlap_penalty = get<double>(j, "overlap_penalty");
    s.final_score = get<double>(j, "final_score");
    return s;
  });
}

json to_json(const Utterance& u) {
  json j = {{"utterance_id", u.utterance_id.str()},
            {"task_id", u.task_id.str()},
            {"ingest_index", u.ingest_index},
            {"priority_rank", u.priority_rank},
            {"scores", to_json(u.scores)},
            {"state", std::string(to_string(u.state))}};
  if (u.is_audio()) {
    const auto& a = u.audio();
    json p = {{"clip_id", a.clip_id},
              {"source_file", a.source_file},
              {"media_file", a.media_file},
              {"start_s", a.start_s},
              {"end_s", a.end_s},
              {"duration_s", a.duration_s},
              {"sample_rate_hz", a.sample_rate_hz},
              {"snr_db", a.snr_db ? json(*a.snr_db) : json(nullptr)}};
    if (a.phonemes) {
      p["phonemes"] = a.phonemes->symbols;
    } else {
      p["phonemes"] = nullptr;
    }
    j["kind"] = "audio";
    j["audio"] = std::move(p);
  } else {
    const auto& t = u.text();
    j["kind"] = "text";
    j["text"] = {{"text_id", t.text_id},
                 {"sentence", t.sentence},
                 {"tokens", t.tokens},
                 {"perplexity_per_token", t.perplexity_per_token
                                              ? json(*t.perplexity_per_token)
                                              : json(nullptr)}};
  }
  return j;
}

Utterance utterance_from_json(const json& j) {
  return guarded([&] {
    Utterance u;
    u.utterance_id = UtteranceId(get<std::string>(j, "utterance_id"));
    u.task_id = TaskId(get<std::string>(j, "task_id"));
    u.ingest_index = get<std::size_t>(j, "ingest_index");
    u.priority_rank = get<std::size_t>(j, "priority_rank");
    u.scores = scores_from_json(j.at("scores"));
    u.state = parse_state(get_or<std::string>(j, "state", "pending"));
    const auto kind = get<std::string>(j, "kind");
    if (kind == "audio") {
      const json& p = j.at("audio");
      AudioClipRef a;
      a.clip_id = get<std::string>(p, "clip_id");
      a.source_file = get<std::string>(p, "source_file");
      a.media_file = get<std::string>(p, "media_file");
      a.start_s = get<double>(p, "start_s");
      a.end_s = get<double>(p, "end_s");
      a.duration_s = get<double>(p, "duration_s");
      a.sample_rate_hz = get<int>(p, "sample_rate_hz");
      if (p.contains("snr_db") && !p["snr_db"].is_null()) {
        a.snr_db = p["snr_db"].get<double>();
      }
      if (p.contains("phonemes") && !p["phonemes"].is_null()) {
        a.phonemes = PhonemeSequence{a.clip_id,
                                     p["phonemes"].get<std::vector<Symbol>>()};
      }
      u.payload = std::move(a);
    } else if (kind == "text") {
      const json& p = j.at("text");
      TextItem t;
      t.text_id = get<std::string>(p, "text_id");
      t.sentence = get<std::string>(p, "sentence");
      t.tokens = get<std::vector<std::string>>(p, "tokens");
      if (p.contains("perplexity_per_token") &&
          !p["perplexity_per_token"].is_null()) {
        t.perplexity_per_token = p["perplexity_per_token"].get<double>();
      }
      u.payload = std::move(t);
    } else {
      throw Error(Errc::CorruptManifest, "unknown utterance kind " + kind);
    }
    return u;
  });
}

json to_json(const AnnotationRecord& r) {
  json j = {{"utterance_id", r.utterance_id.str()},
            {"annotator_id", r.annotator_id.str()},
            {"revision", r.revision},
            {"saved_at", format_utc(r.saved_at)},
            {"final", r.final}};
  if (const auto* t = std::get_if<TranscriptText>(&r.content)) {
    j["transcript"] = t->text;
  } else {
    const auto& rec = std::get<RecordingRef>(r.content);
    j["recording"] = {{"path", rec.path}, {"duration_s", rec.duration_s}};
  }
  return j;
}

AnnotationRecord record_from_json(const json& j) {
  return guarded([&] {
    AnnotationRecord r;
    r.utterance_id = UtteranceId(get<std::string>(j, "utterance_id"));
    r.annotator_id = AnnotatorId(get<std::string>(j, "annotator_id"));
    r.revision = get<std::uint64_t>(j, "revision");
    r.saved_at = parse_utc(get<std::string>(j, "saved_at"));
    r.final = get<bool>(j, "final");
    if (j.contains("transcript")) {
      r.content = TranscriptText{j["transcript"].get<std::string>()};
    } else if (j.contains("recording")) {
      const json& rec = j["recording"];
      r.content = RecordingRef{get<std::string>(rec, "path"),
                               get<double>(rec, "duration_s")};
    } else {
      throw Error(Errc::CorruptManifest, "annotation without content");
    }
    return r;
  });
}

json to_json(const SkipRecord& r) {
  return {{"utterance_id", r.utterance_id.str()},
          {"annotator_id", r.annotator_id.str()},
          {"at", format_utc(r.at)}};
}

SkipRecord skip_from_json(const json& j) {
  return guarded([&] {
    return SkipRecord{UtteranceId(get<std::string>(j, "utterance_id")),
                      AnnotatorId(get<std::string>(j, "annotator_id")),
                      parse_utc(get<std::string>(j, "at"))};
  });
}

json to_json(const RankedEntry& e, std::size_t rank) {
  return {{"utterance_id", e.id},
          {"rank", rank},
          {"input_index", e.input_index},
          {"base_raw", e.scores.base_raw},
          {"base_score", e.scores.base_score},
          {"snr_penalty", e.scores.snr_penalty},
          {"overlap_penalty", e.scores.overlap_penalty},
          {"final_score", e.scores.final_score}};
}

RankedEntry ranked_entry_from_json(const json& j) {
  return guarded([&] {
    RankedEntry e;
    e.id = get<std::string>(j, "utterance_id");
    e.input_index = get<std::size_t>(j, "input_index");
    e.scores = scores_from_json(j);
    return e;
  });
}

json queue_to_json(const RankedQueue& q) {
  json entries = json::array();
  for (std::size_t i = 0; i < q.entries.size(); ++i) {
    entries.push_back(to_json(q.entries[i], i + 1));
  }
  return {{"schema", kManifestSchema}, {"entries", std::move(entries)}};
}

RankedQueue queue_from_json(const json& j) {
  return guarded([&] {
    if (get<int>(j, "schema") != kManifestSchema) {
      throw Error(Errc::CorruptManifest, "unsupported queue schema");
    }
    RankedQueue q;
    for (const auto& e : j.at("entries")) {
      q.entries.push_back(ranked_entry_from_json(e));
    }
    return q;
  });
}

json manifest_to_json(const TaskState& s) {
  json utts = json::array();
  for (const auto& u : s.utterances) {
    json j = to_json(u);
    j.erase("state");  // derived from the log on load
    utts.push_back(std::move(j));
  }
  return {{"schema", kManifestSchema},
          {"task", to_json(s.descriptor)},
          {"utterances", std::move(utts)},
          {"symbol_table", s.symbol_table}};
}

TaskState manifest_from_json(const json& j) {
  return guarded([&] {
    if (!j.is_object() || get<int>(j, "schema") != kManifestSchema) {
      throw Error(Errc::CorruptManifest, "unsupported manifest schema");
    }
    TaskState s{descriptor_from_json(j.at("task")), {}, {}, {}, {}, {}, {}};
    for (const auto& u : j.at("utterances")) {
      s.utterances.push_back(utterance_from_json(u));
    }
    s.symbol_table =
        get_or<std::vector<std::string>>(j, "symbol_table", {});
    return s;
  });
}

json log_record(const AnnotationRecord& r) {
  json j = to_json(r);
  j["type"] = "annotation";
  return j;
}

json log_record(const SkipRecord& r) {
  json j = to_json(r);
  j["type"] = "skip";
  return j;
}

}  // namespace santlr::codec
