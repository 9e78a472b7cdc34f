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

#include "santlr/http_server.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

#include "json_codec.hpp"
#include "santlr/errors.hpp"

namespace santlr {
namespace {

using codec::json;

const char* const kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message, json extra = json::object()) {
  extra["error"] = code;
  extra["message"] = message;
  send_json(res, status, extra);
}

TaskId task_of(const httplib::Request& req) { return TaskId(req.matches[1]); }
UtteranceId utterance_of(const httplib::Request& req) {
  return UtteranceId(req.matches[2]);
}

std::string share_token_of(const httplib::Request& req) {
  if (req.has_param("token")) return req.get_param_value("token");
  if (req.has_header("X-Share-Token")) return req.get_header_value("X-Share-Token");
  if (req.has_param("admin_token")) return req.get_param_value("admin_token");
  return req.get_header_value("X-Admin-Token");
}

std::string admin_token_of(const httplib::Request& req) {
  if (req.has_param("admin_token")) return req.get_param_value("admin_token");
  return req.get_header_value("X-Admin-Token");
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) {
    throw Error(Errc::InvalidArgument, "request body must be a JSON object");
  }
  return j;
}

std::string field(const httplib::Request& req, const json& body,
                  const char* name) {
  if (body.contains(name) && body[name].is_string()) {
    return body[name].get<std::string>();
  }
  if (req.has_file(name)) return req.get_file_value(name).content;
  return req.get_param_value(name);
}

std::uint64_t parse_revision(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) {
    throw Error(Errc::InvalidArgument, "revision must be a positive integer");
  }
  return v;
}

bool parse_bool(const std::string& s, bool fallback) {
  if (s.empty()) return fallback;
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(Errc::InvalidArgument, "expected a boolean, got '" + s + "'");
}

json lease_json(const Lease& l) {
  return {{"utterance_id", l.utterance_id.str()},
          {"annotator_id", l.annotator_id.str()},
          {"issued_at", format_utc(l.issued_at)},
          {"expires_at", format_utc(l.expires_at())},
          {"ttl_s", l.ttl.count()}};
}

json utterance_json(const Utterance& u) {
  json j = codec::to_json(u);
  if (u.is_audio()) {
    j["audio_url"] = "/api/tasks/" + u.task_id.str() + "/audio/" +
                     u.utterance_id.str();
  }
  return j;
}

json progress_json(const ProgressReport& p) {
  return {{"total", p.total},
          {"pending", p.pending},
          {"annotated", p.annotated},
          {"leased", p.leased},
          {"skipped", p.skipped},
          {"words_collected", p.words_collected},
          {"audio_minutes_collected", p.audio_minutes_collected},
          {"active_annotators_last_10min", p.active_annotators_last_10min}};
}

json stats_json(const SessionStats& s) {
  return {{"words", s.words},
          {"audio_minutes", s.audio_minutes},
          {"window_hours", s.window_hours},
          {"words_per_hour", s.words_per_hour},
          {"audio_minutes_per_hour", s.audio_minutes_per_hour}};
}

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::WrongFileKind:
    case Errc::MalformedHeader:
    case Errc::UnsupportedEncoding:
    case Errc::TruncatedPayload:
    case Errc::EmptyBuffer:
    case Errc::BufferTooShort:
    case Errc::EmptyWindow:
    case Errc::IllegalTransition:
      return 400;
    case Errc::Unauthorized: return 403;
    case Errc::TaskNotFound:
    case Errc::UtteranceNotFound:
      return 404;
    case Errc::StaleRevision:
    case Errc::LeaseLimit:
    case Errc::LeaseRequired:
    case Errc::LockBusy:
    case Errc::TaskNotReady:
      return 409;
    case Errc::LeaseExpired: return 410;
    case Errc::PayloadTooLarge: return 413;
    case Errc::UnsupportedMedia: return 415;
    case Errc::NoUtterances:
    case Errc::InsufficientData:
      return 422;
    default: return 500;
  }
}

struct HttpServer::Impl {
  AnnotationService& service;
  HttpOptions options;
  httplib::Server server;
  std::thread thread;
  std::atomic<int> port{0};

  Impl(AnnotationService& s, HttpOptions o) : service(s), options(std::move(o)) {
    routes();
  }

  std::string base_url(const httplib::Request& req) const {
    if (!options.public_base_url.empty()) return options.public_base_url;
    const std::string host = req.get_header_value("Host");
    return "http://" + (host.empty() ? "localhost" : host);
  }

  void routes();
};

void HttpServer::Impl::routes() {
  const std::size_t threads = options.threads;
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server.set_payload_max_length(options.max_upload_bytes);

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const StaleRevisionError& e) {
      send_error(res, 409, to_string(e.code()), e.message(),
                 {{"expected", e.expected()}, {"got", e.got()}});
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.message());
    } catch (const json::exception& e) {
      send_error(res, 400, "InvalidArgument", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    } catch (...) {
      send_error(res, 500, "Internal", "unknown error");
    }
  });

  if (!options.allow_origin.empty()) {
    const std::string origin = options.allow_origin;
    server.set_post_routing_handler([origin](const httplib::Request&,
                                             httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Expose-Headers",
                     "Content-Range, Accept-Ranges, Content-Length, X-Santlr-Warnings");
    });
    server.Options(R"(/api/.*)", [origin](const httplib::Request&,
                                          httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
      res.set_header("Access-Control-Allow-Headers",
                     "Content-Type, Range, X-Share-Token, X-Admin-Token");
      res.set_header("Access-Control-Max-Age", "600");
    });
  }

  server.Get("/api/config", [this](const httplib::Request&, httplib::Response& res) {
    const auto& o = service.options();
    send_json(res, 200,
              {{"api_base", "/api"},
               {"lease_ttl_s", o.lease_ttl.count()},
               {"draft_grace_s", o.draft_grace.count()},
               {"max_leases_per_annotator", o.max_leases_per_annotator},
               {"max_upload_mb", options.max_upload_bytes >> 20},
               {"autosave_interval_s", 3}});
  });

  server.Post("/api/tasks", [this](const httplib::Request& req,
                                   httplib::Response& res) {
    if (!req.is_multipart_form_data()) {
      throw Error(Errc::InvalidArgument, "expected multipart/form-data");
    }
    const Mode mode = [&] {
      try {
        return parse_mode(req.get_file_value("mode").content);
      } catch (const Error& e) {
        throw Error(Errc::InvalidArgument, e.message());
      }
    }();
    RankingConfig cfg;
    const std::string cfg_text = req.get_file_value("config").content;
    if (!cfg_text.empty()) {
      cfg = codec::ranking_config_from_json(json::parse(cfg_text));
    }
    std::vector<UploadFile> files;
    for (const auto& [name, item] : req.files) {
      if (!item.filename.empty()) files.push_back({item.filename, item.content});
    }
    const CreatedTask t = service.create_task(
        mode, cfg, req.get_file_value("language").content, files);
    const auto& d = t.descriptor;
    send_json(res, t.ready ? 201 : 202,
              {{"task_id", d.task_id().str()},
               {"share_url", base_url(req) + share_path(d)},
               {"share_token", d.share_token()},
               {"admin_token", d.admin_token()},
               {"mode", std::string(to_string(d.mode()))},
               {"utterances", t.utterances},
               {"status", t.ready ? "ready" : "processing"},
               {"warnings", t.warnings}});
  });

  server.Get(R"(/api/tasks/([^/]+))", [this](const httplib::Request& req,
                                             httplib::Response& res) {
    service.authorize(task_of(req), share_token_of(req));
    send_json(res, 200, codec::to_json(service.descriptor(task_of(req)), false));
  });

  server.Get(R"(/api/tasks/([^/]+)/status)", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    service.authorize(task_of(req), share_token_of(req));
    const TaskStatus s = service.status(task_of(req));
    json j = {{"state", s.state}, {"step", s.step}, {"done", s.done},
              {"total", s.total}};
    if (!s.error.empty()) j["error"] = s.error;
    send_json(res, 200, j);
  });

  server.Post(R"(/api/tasks/([^/]+)/next)", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
    const TaskId task = task_of(req);
    service.authorize(task, share_token_of(req));
    const json body = body_json(req);
    const auto grant =
        service.next(task, AnnotatorId(field(req, body, "annotator_id")));
    if (!grant) {
      res.status = 204;
      return;
    }
    json j = {{"utterance", utterance_json(grant->utterance)},
              {"lease", lease_json(grant->lease)},
              {"revision", grant->revision}};
    if (grant->draft) j["draft"] = codec::to_json(*grant->draft);
    send_json(res, 200, j);
  });

  server.Put(R"(/api/tasks/([^/]+)/annotations/([^/]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               const TaskId task = task_of(req);
               service.authorize(task, share_token_of(req));
               const json body = body_json(req);
               if (!body.contains("revision") || !body["revision"].is_number_unsigned()) {
                 throw Error(Errc::InvalidArgument, "revision must be a positive integer");
               }
               const auto rev = service.save_transcript(
                   task, utterance_of(req),
                   AnnotatorId(body.value("annotator_id", "")),
                   body["revision"].get<std::uint64_t>(),
                   body.value("text", ""), body.value("final", false));
               send_json(res, 200, {{"accepted_revision", rev}});
             });

  server.Post(R"(/api/tasks/([^/]+)/recordings/([^/]+))",
              [this](const httplib::Request& req, httplib::Response& res) {
                const TaskId task = task_of(req);
                service.authorize(task, share_token_of(req));
                if (!req.has_file("audio")) {
                  throw Error(Errc::InvalidArgument, "missing 'audio' part");
                }
                const json none = json::object();
                const auto rev = service.save_recording(
                    task, utterance_of(req),
                    AnnotatorId(field(req, none, "annotator_id")),
                    parse_revision(field(req, none, "revision")),
                    req.get_file_value("audio").content,
                    parse_bool(field(req, none, "final"), true));
                send_json(res, 200, {{"accepted_revision", rev}});
              });

  server.Post(R"(/api/tasks/([^/]+)/utterances/([^/]+)/skip)",
              [this](const httplib::Request& req, httplib::Response& res) {
                const TaskId task = task_of(req);
                service.authorize(task, share_token_of(req));
                const json body = body_json(req);
                service.skip(task, utterance_of(req),
                             AnnotatorId(field(req, body, "annotator_id")));
                send_json(res, 200, {{"skipped", true}});
              });

  server.Get(R"(/api/tasks/([^/]+)/audio/([^/]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               const TaskId task = task_of(req);
               service.authorize(task, share_token_of(req));
               AudioFile f = service.audio(task, utterance_of(req));
               res.set_header("Accept-Ranges", "bytes");
               res.set_header("Cache-Control", "private, max-age=3600");
               // Status stays unset so the server applies Range handling.
               res.set_content(std::move(f.bytes), f.content_type);
             });

  server.Get(R"(/api/tasks/([^/]+)/progress)",
             [this](const httplib::Request& req, httplib::Response& res) {
               const TaskId task = task_of(req);
               service.authorize(task, share_token_of(req));
               send_json(res, 200, progress_json(service.progress(task)));
             });

  server.Get(R"(/api/tasks/([^/]+)/stats)",
             [this](const httplib::Request& req, httplib::Response& res) {
               const TaskId task = task_of(req);
               service.authorize(task, share_token_of(req));
               long minutes = 60;
               if (req.has_param("window_min")) {
                 minutes = std::stol(req.get_param_value("window_min"));
               }
               if (minutes <= 0) {
                 throw Error(Errc::EmptyWindow, "window_min must be positive");
               }
               send_json(res, 200,
                         stats_json(service.stats(task, std::chrono::minutes(minutes))));
             });

  server.Get(R"(/api/tasks/([^/]+)/export)",
             [this](const httplib::Request& req, httplib::Response& res) {
               const TaskId task = task_of(req);
               service.authorize_admin(task, admin_token_of(req));
               const bool exclude =
                   parse_bool(req.get_param_value("exclude_skipped"), false);
               ExportResult r = service.export_task(task, exclude);
               std::string warnings;
               for (const auto& w : r.warnings) {
                 if (!warnings.empty()) warnings += "; ";
                 warnings += w;
               }
               if (!warnings.empty()) res.set_header("X-Santlr-Warnings", warnings);
               res.set_header("Content-Disposition",
                              "attachment; filename=\"" + task.str() + ".zip\"");
               res.status = 200;
               res.set_content(std::move(r.archive), "application/zip");
             });

  if (!options.static_dir.empty()) {
    const auto dir = options.static_dir;
    server.set_mount_point("/", dir.string());
    server.Get(R"(/t/([^/]+))", [dir](const httplib::Request&,
                                      httplib::Response& res) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(dir / "index.html", ec)) {
        send_error(res, 404, "NotFound", "no web UI installed");
        return;
      }
      res.status = 200;
      res.set_content(read_file(dir / "index.html"), "text/html; charset=utf-8");
    });
  }
}

HttpServer::HttpServer(AnnotationService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
  auto& s = impl_->server;
  int port = impl_->options.port;
  if (port == 0) {
    port = s.bind_to_any_port(impl_->options.host);
  } else if (!s.bind_to_port(impl_->options.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(Errc::StorageFailure,
                "cannot bind " + impl_->options.host + ":" +
                    std::to_string(impl_->options.port));
  }
  impl_->port = port;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  s.wait_until_ready();
  return port;
}

void HttpServer::run() {
  start();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable() && impl_->thread.get_id() != std::this_thread::get_id()) {
    impl_->thread.join();
  }
}

int HttpServer::port() const noexcept { return impl_->port; }

}  // namespace santlr
