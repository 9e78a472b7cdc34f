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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace santlr {

enum class Errc {
  InvalidArgument,
  IllegalTransition,
  MalformedHeader,
  UnsupportedEncoding,
  TruncatedPayload,
  EmptyBuffer,
  BufferTooShort,
  InsufficientData,
  NotFitted,
  ExternalCommandFailed,
  EmptyBatch,
  MissingPhonemes,
  EmptySequence,
  EmptyCorpus,
  EmptySentence,
  StaleRevision,
  TaskNotFound,
  CorruptManifest,
  StorageFailure,
  LockBusy,
  EmptyWindow,
  WrongFileKind,
  NoUtterances,
  UtteranceNotFound,
  Unauthorized,
  LeaseLimit,
  LeaseRequired,
  LeaseExpired,
  UnsupportedMedia,
  PayloadTooLarge,
  TaskNotReady,
};

std::string_view to_string(Errc code);

// All library failures are reported as santlr::Error (or a subclass) so that
// callers such as the HTTP layer and the CLI can map codes onto status codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

class StaleRevisionError : public Error {
 public:
  StaleRevisionError(std::uint64_t expected, std::uint64_t got);

  std::uint64_t expected() const noexcept { return expected_; }
  std::uint64_t got() const noexcept { return got_; }

 private:
  std::uint64_t expected_;
  std::uint64_t got_;
};

}  // namespace santlr
