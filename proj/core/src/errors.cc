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

#include "santlr/errors.hpp"

namespace santlr {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IllegalTransition: return "IllegalTransition";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::UnsupportedEncoding: return "UnsupportedEncoding";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::EmptyBuffer: return "EmptyBuffer";
    case Errc::BufferTooShort: return "BufferTooShort";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::NotFitted: return "NotFitted";
    case Errc::ExternalCommandFailed: return "ExternalCommandFailed";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::MissingPhonemes: return "MissingPhonemes";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::EmptySentence: return "EmptySentence";
    case Errc::StaleRevision: return "StaleRevision";
    case Errc::TaskNotFound: return "TaskNotFound";
    case Errc::CorruptManifest: return "CorruptManifest";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::LockBusy: return "LockBusy";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::WrongFileKind: return "WrongFileKind";
    case Errc::NoUtterances: return "NoUtterances";
    case Errc::UtteranceNotFound: return "UtteranceNotFound";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::LeaseLimit: return "LeaseLimit";
    case Errc::LeaseRequired: return "LeaseRequired";
    case Errc::LeaseExpired: return "LeaseExpired";
    case Errc::UnsupportedMedia: return "UnsupportedMedia";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::TaskNotReady: return "TaskNotReady";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message) {}

StaleRevisionError::StaleRevisionError(std::uint64_t expected,
                                       std::uint64_t got)
    : Error(Errc::StaleRevision, "expected revision " +
                                     std::to_string(expected) + ", got " +
                                     std::to_string(got)),
      expected_(expected),
      got_(got) {}

}  // namespace santlr
