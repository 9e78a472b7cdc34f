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

// JSON-over-HTTP front end of AnnotationService.

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

#include "santlr/errors.hpp"
#include "santlr/service.hpp"

namespace santlr {

struct HttpOptions {
  std::string host = "0.0.0.0";
  int port = 8080;  // 0 picks a free port
  std::string allow_origin;  // CORS origin; empty disables CORS headers
  std::filesystem::path static_dir;  // optional web UI bundle
  std::size_t max_upload_bytes = std::size_t{512} << 20;
  // Prefix of share URLs; defaults to http://<Host header>.
  std::string public_base_url;
  std::size_t threads = 64;
};

// HTTP status for a library error code.
int http_status(Errc code);

class HttpServer {
 public:
  HttpServer(AnnotationService& service, HttpOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace santlr
