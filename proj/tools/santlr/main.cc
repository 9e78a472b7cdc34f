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

// santlr: offline ingestion, ranking, serving, export and statistics.
//
// Exit codes: 0 success, 1 user error, 2 internal error.

#include <signal.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "santlr/errors.hpp"
#include "santlr/http_server.hpp"
#include "santlr/ingest.hpp"
#include "santlr/persistence.hpp"
#include "santlr/service.hpp"
#include "santlr/stats.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Common {
  std::string data_dir = "data";
  bool json = false;
};

struct RankFlags {
  std::optional<double> w_snr, w_overlap, snr_target_db, overlap_threshold,
      lm_add_k, text_dup_threshold;
  std::optional<int> lm_order;

  void add(CLI::App* cmd) {
    cmd->add_option("--w-snr", w_snr, "Weight of the S/N penalty");
    cmd->add_option("--w-overlap", w_overlap, "Weight of the overlap penalty");
    cmd->add_option("--snr-target-db", snr_target_db, "S/N at which the penalty vanishes");
    cmd->add_option("--overlap-threshold", overlap_threshold,
                    "Phoneme similarity counted as overlap");
    cmd->add_option("--lm-order", lm_order, "n-gram order for text ranking");
    cmd->add_option("--lm-add-k", lm_add_k, "Add-k smoothing constant");
    cmd->add_option("--text-dup-threshold", text_dup_threshold,
                    "Token similarity counted as duplicate text");
  }

  santlr::RankingConfig apply(santlr::RankingConfig cfg) const {
    if (w_snr) cfg.w_snr = *w_snr;
    if (w_overlap) cfg.w_overlap = *w_overlap;
    if (snr_target_db) cfg.snr_target_db = *snr_target_db;
    if (overlap_threshold) cfg.overlap_threshold = *overlap_threshold;
    if (lm_order) cfg.lm_order = *lm_order;
    if (lm_add_k) cfg.lm_add_k = *lm_add_k;
    if (text_dup_threshold) cfg.text_dup_threshold = *text_dup_threshold;
    cfg.validate();
    return cfg;
  }
};

bool is_user_error(santlr::Errc c) {
  using santlr::Errc;
  switch (c) {
    case Errc::StorageFailure:
    case Errc::CorruptManifest:
    case Errc::ExternalCommandFailed:
    case Errc::NotFitted:
      return false;
    default:
      return true;
  }
}

void emit(const Common& c, const json& j, const std::string& text) {
  if (c.json) {
    std::cout << j.dump() << '\n';
  } else {
    std::cout << text;
  }
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> argv;
  std::istringstream in(cmd);
  for (std::string part; in >> part;) argv.push_back(part);
  return argv;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_ingest(const Common& c, const std::string& mode,
               const std::vector<std::string>& files, const RankFlags& rf,
               const std::string& language, const std::string& transcode,
               const std::string& base_url) {
  santlr::IngestOptions opts;
  opts.mode = santlr::parse_mode(mode);
  opts.ranking = rf.apply({});
  opts.language_tag = language;
  opts.transcode_cmd = split_command(transcode);
  std::vector<santlr::UploadFile> uploads;
  for (const auto& f : files) {
    santlr::UploadFile u{fs::path(f).filename().string(), {}};
    uploads.push_back(std::move(u));
  }
  santlr::check_upload_kinds(opts.mode, uploads);
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      uploads[i].bytes = santlr::read_file(files[i]);
    } catch (const santlr::Error&) {
      throw santlr::Error(santlr::Errc::InvalidArgument, "cannot read " + files[i]);
    }
  }
  const santlr::PreparedTask prepared = santlr::prepare_task(uploads, opts);
  const santlr::TaskId id = santlr::commit_task(c.data_dir, prepared, opts);
  const auto& d = prepared.state.descriptor;
  const std::string url = base_url + santlr::share_path(d);
  for (const auto& w : prepared.warnings) std::cerr << "warning: " << w << '\n';
  emit(c,
       {{"task_id", id.str()},
        {"share_url", url},
        {"share_token", d.share_token()},
        {"admin_token", d.admin_token()},
        {"mode", std::string(santlr::to_string(d.mode()))},
        {"utterances", prepared.state.utterances.size()},
        {"warnings", prepared.warnings}},
       "task_id     " + id.str() + "\nshare_url   " + url + "\nadmin_token " +
           d.admin_token() + "\nutterances  " +
           std::to_string(prepared.state.utterances.size()) + "\n");
  return 0;
}

int cmd_rank(const Common& c, const std::string& task, const RankFlags& rf,
             std::size_t top) {
  santlr::TaskStore store = santlr::TaskStore::open(c.data_dir, santlr::TaskId(task));
  const santlr::RankingConfig cfg = rf.apply(store.load().descriptor.config());
  const santlr::RankedQueue q = santlr::rerank_task(store, cfg);
  std::vector<double> scores;
  for (const auto& e : q.entries) scores.push_back(e.scores.final_score);
  std::sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  const double median =
      n % 2 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
  std::ostringstream out;
  out << "N       " << n << "\nmin     " << fmt(scores.front()) << "\nmedian  "
      << fmt(median) << "\nmax     " << fmt(scores.back()) << "\n";
  if (top > 0) {
    out << "\nrank  utterance  base      snr_pen   overlap   final\n";
    for (std::size_t i = 0; i < std::min(top, n); ++i) {
      const auto& e = q.entries[i];
      char line[160];
      std::snprintf(line, sizeof line, "%-5zu %-10s %-9.4f %-9.4f %-9.4f %.4f\n",
                    i + 1, e.id.c_str(), e.scores.base_score, e.scores.snr_penalty,
                    e.scores.overlap_penalty, e.scores.final_score);
      out << line;
    }
  }
  emit(c,
       {{"task_id", task},
        {"n", n},
        {"min", scores.front()},
        {"median", median},
        {"max", scores.back()},
        {"queue", (store.dir() / "queue.json").string()}},
       out.str());
  return 0;
}

int cmd_export(const Common& c, const std::string& task, const std::string& out,
               bool exclude_skipped) {
  const santlr::TaskState state =
      santlr::TaskStore::load(c.data_dir, santlr::TaskId(task));
  const santlr::ExportResult r = santlr::export_archive(
      fs::path(c.data_dir) / task, state, {exclude_skipped, santlr::now_utc()});
  std::ofstream f(out, std::ios::binary);
  f.write(r.archive.data(), static_cast<std::streamsize>(r.archive.size()));
  if (!f.flush()) {
    throw santlr::Error(santlr::Errc::InvalidArgument, "cannot write " + out);
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  emit(c,
       {{"task_id", task},
        {"out", out},
        {"items", r.items},
        {"bytes", r.archive.size()},
        {"warnings", r.warnings}},
       "exported " + std::to_string(r.items) + " items to " + out + "\n");
  return 0;
}

int cmd_stats(const Common& c, const std::string& task, long window_min,
              const std::string& end_text) {
  if (window_min <= 0) {
    throw santlr::Error(santlr::Errc::EmptyWindow, "--window-min must be positive");
  }
  const santlr::TaskState state =
      santlr::TaskStore::load(c.data_dir, santlr::TaskId(task));
  const auto events = santlr::collection_events(state);
  santlr::Timestamp end = santlr::now_utc();
  if (!end_text.empty()) {
    end = santlr::parse_utc(end_text);
  } else if (!events.empty()) {
    end = std::max_element(events.begin(), events.end(),
                           [](const auto& a, const auto& b) { return a.at < b.at; })
              ->at +
          std::chrono::milliseconds(1);
  }
  const santlr::Timestamp begin = end - std::chrono::minutes(window_min);
  const santlr::SessionStats s = santlr::compute_session_stats(events, begin, end);
  char text[512];
  std::snprintf(text, sizeof text,
                "window           %s .. %s\n"
                "words            %zu\n"
                "audio_minutes    %.3f\n"
                "words/hour       %.3f\n"
                "audio_min/hour   %.3f\n",
                santlr::format_utc(begin).c_str(), santlr::format_utc(end).c_str(),
                s.words, s.audio_minutes, s.words_per_hour,
                s.audio_minutes_per_hour);
  emit(c,
       {{"task_id", task},
        {"window_begin", santlr::format_utc(begin)},
        {"window_end", santlr::format_utc(end)},
        {"words", s.words},
        {"audio_minutes", s.audio_minutes},
        {"words_per_hour", s.words_per_hour},
        {"audio_minutes_per_hour", s.audio_minutes_per_hour}},
       text);
  return 0;
}

struct ServeFlags {
  std::string host = "0.0.0.0";
  int port = 8080;
  long lease_ttl_s = 900;
  std::string transcode;
  std::size_t max_upload_mb = 512;
  std::string allow_origin;
  std::string static_dir;
  std::string public_url;
};

int cmd_serve(const Common& c, const ServeFlags& f) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  santlr::ServiceOptions so;
  so.data_dir = c.data_dir;
  so.lease_ttl = std::chrono::seconds(f.lease_ttl_s);
  so.transcode_cmd = split_command(f.transcode);
  santlr::AnnotationService service(so);
  santlr::HttpOptions ho;
  ho.host = f.host;
  ho.port = f.port;
  ho.allow_origin = f.allow_origin;
  ho.static_dir = f.static_dir;
  ho.max_upload_bytes = f.max_upload_mb << 20;
  ho.public_base_url = f.public_url;
  santlr::HttpServer server(service, ho);
  const int port = server.start();
  emit(c, {{"listening", f.host + ":" + std::to_string(port)}, {"data_dir", c.data_dir}},
       "listening on " + f.host + ":" + std::to_string(port) + " (data: " +
           c.data_dir + ")\n");
  std::cout.flush();
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"santlr: speech annotation task server and tools"};
  app.require_subcommand(1);
  Common common;
  if (const char* env = std::getenv("SANTLR_DATA_DIR"); env && *env) {
    common.data_dir = env;
  }
  app.add_option("--data-dir", common.data_dir,
                 "Task store root (default $SANTLR_DATA_DIR or ./data)");
  app.add_flag("--json", common.json, "Machine-readable JSON output");
  // Subcommands hand unknown options back, so common flags work on either side.
  app.fallthrough();

  std::string mode, language, transcode, base_url = "http://localhost:8080";
  std::vector<std::string> files;
  RankFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "Create a task from WAV or text files");
  ingest->add_option("--mode", mode, "transcribe or record")->required();
  ingest->add_option("--language", language, "BCP-47 language tag");
  ingest->add_option("--transcode-cmd", transcode,
                     "Command producing a compressed rendition ({in} {out})");
  ingest->add_option("--base-url", base_url, "Prefix of the printed share URL");
  ingest->add_option("files", files, "Input files")->required();
  ingest_flags.add(ingest);

  std::string task;
  RankFlags rank_flags;
  std::size_t top = 10;
  auto* rank = app.add_subcommand("rank", "Recompute a task's ranked queue");
  rank->add_option("--task", task, "Task id")->required();
  rank->add_option("--top", top, "Rows of the queue to print");
  rank_flags.add(rank);

  ServeFlags sf;
  auto* serve = app.add_subcommand("serve", "Run the HTTP annotation service");
  serve->add_option("--host", sf.host, "Listen address");
  serve->add_option("--port", sf.port, "Listen port");
  serve->add_option("--lease-ttl-s", sf.lease_ttl_s, "Lease lifetime in seconds")
      ->check(CLI::PositiveNumber);
  serve->add_option("--transcode-cmd", sf.transcode,
                    "Command producing a compressed rendition ({in} {out})");
  serve->add_option("--max-upload-mb", sf.max_upload_mb, "Request body limit");
  serve->add_option("--allow-origin", sf.allow_origin, "CORS origin for the web UI");
  serve->add_option("--static-dir", sf.static_dir, "Web UI bundle to serve");
  serve->add_option("--public-url", sf.public_url, "Prefix of share URLs");

  std::string out;
  bool exclude_skipped = false;
  auto* exp = app.add_subcommand("export", "Write a ZIP of annotated audio and transcripts");
  exp->add_option("--task", task, "Task id")->required();
  exp->add_option("--out", out, "Output .zip path")->required();
  exp->add_flag("--exclude-skipped", exclude_skipped,
                "Leave skipped utterances out of the completion denominator");

  long window_min = 60;
  std::string end_at;
  auto* stats = app.add_subcommand("stats", "Words and audio minutes collected per hour");
  stats->add_option("--task", task, "Task id")->required();
  stats->add_option("--window-min", window_min, "Window length in minutes");
  stats->add_option("--end", end_at,
                    "Window end (ISO-8601 UTC); default: latest finalized record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*ingest) return cmd_ingest(common, mode, files, ingest_flags, language, transcode, base_url);
    if (*rank) return cmd_rank(common, task, rank_flags, top);
    if (*serve) return cmd_serve(common, sf);
    if (*exp) return cmd_export(common, task, out, exclude_skipped);
    if (*stats) return cmd_stats(common, task, window_min, end_at);
  } catch (const santlr::Error& e) {
    const int rc = is_user_error(e.code()) ? 1 : 2;
    if (common.json) {
      std::cout << json{{"error", std::string(santlr::to_string(e.code()))},
                        {"message", e.message()}}
                       .dump()
                << '\n';
    }
    std::cerr << "santlr: " << e.what() << '\n';
    return rc;
  } catch (const std::exception& e) {
    if (common.json) {
      std::cout << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    }
    std::cerr << "santlr: internal error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
