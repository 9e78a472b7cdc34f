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

#include "santlr/model.hpp"

#include <openssl/rand.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "santlr/errors.hpp"

namespace santlr {

namespace {

void require(bool ok, const char* field, const char* range) {
  if (!ok) {
    throw Error(Errc::InvalidArgument,
                std::string("ranking config: ") + field + " must be " + range);
  }
}

}  // namespace

void RankingConfig::validate() const {
  require(std::isfinite(w_snr) && w_snr >= 0.0, "w_snr", "finite and >= 0");
  require(std::isfinite(w_overlap) && w_overlap >= 0.0, "w_overlap",
          "finite and >= 0");
  // Used as a divisor in the SNR penalty.
  require(std::isfinite(snr_target_db) && snr_target_db > 0.0,
          "snr_target_db", "finite and > 0");
  require(overlap_threshold >= 0.0 && overlap_threshold <= 1.0,
          "overlap_threshold", "in [0, 1]");
  require(lm_order >= 1, "lm_order", ">= 1");
  require(std::isfinite(lm_add_k) && lm_add_k > 0.0, "lm_add_k",
          "finite and > 0");
  require(text_dup_threshold >= 0.0 && text_dup_threshold <= 1.0,
          "text_dup_threshold", "in [0, 1]");
}

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now());
}

std::string format_utc(Timestamp t) {
  const auto ms = t.time_since_epoch().count();
  std::int64_t secs = ms / 1000;
  std::int64_t rem = ms % 1000;
  if (rem < 0) {
    rem += 1000;
    secs -= 1;
  }
  const std::time_t tt = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(rem));
  return buf;
}

Timestamp parse_utc(std::string_view text) {
  int year = 0, mon = 0, day = 0, hour = 0, min = 0, sec = 0, msec = 0;
  std::string s(text);
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &year, &mon, &day,
                  &hour, &min, &sec, &consumed) != 6) {
    throw Error(Errc::InvalidArgument, "bad UTC timestamp: " + s);
  }
  std::string_view rest = std::string_view(s).substr(consumed);
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    int digits = 0;
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') {
      if (digits < 3) msec = msec * 10 + (rest.front() - '0');
      ++digits;
      rest.remove_prefix(1);
    }
    for (; digits < 3; ++digits) msec *= 10;
  }
  if (rest != "Z") {
    throw Error(Errc::InvalidArgument, "UTC timestamp must end in Z: " + s);
  }
  const std::chrono::year_month_day ymd{std::chrono::year(year),
                                       std::chrono::month(static_cast<unsigned>(mon)),
                                       std::chrono::day(static_cast<unsigned>(day))};
  if (!ymd.ok() || hour > 23 || min > 59 || sec > 60 || hour < 0 || min < 0 || sec < 0) {
    throw Error(Errc::InvalidArgument, "bad UTC timestamp: " + s);
  }
  const std::int64_t secs =
      std::chrono::sys_days(ymd).time_since_epoch().count() * 86400 +
      hour * 3600 + min * 60 + sec;
  return Timestamp(std::chrono::milliseconds(secs * 1000 + msec));
}

std::string_view to_string(Mode mode) {
  return mode == Mode::Transcribe ? "transcribe" : "record";
}

Mode parse_mode(std::string_view text) {
  if (text == "transcribe" || text == "Transcribe") return Mode::Transcribe;
  if (text == "record" || text == "Record") return Mode::Record;
  throw Error(Errc::InvalidArgument,
              "mode must be transcribe or record, got '" + std::string(text) +
                  "'");
}

std::string random_token(std::size_t bytes) {
  std::vector<unsigned char> raw(bytes);
  if (RAND_bytes(raw.data(), static_cast<int>(raw.size())) != 1) {
    throw Error(Errc::StorageFailure, "system random source unavailable");
  }
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  std::string out;
  out.reserve((bytes * 4 + 2) / 3);
  std::size_t i = 0;
  for (; i + 3 <= raw.size(); i += 3) {
    const std::uint32_t v = (raw[i] << 16) | (raw[i + 1] << 8) | raw[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (raw.size() - i == 1) {
    const std::uint32_t v = raw[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
  } else if (raw.size() - i == 2) {
    const std::uint32_t v = (raw[i] << 16) | (raw[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
  }
  return out;
}

TaskDescriptor::TaskDescriptor(TaskId task_id, Mode mode,
                               std::string share_token,
                               std::string admin_token, Timestamp created_at,
                               std::string language_tag, RankingConfig config)
    : task_id_(std::move(task_id)),
      mode_(mode),
      share_token_(std::move(share_token)),
      admin_token_(std::move(admin_token)),
      created_at_(created_at),
      language_tag_(std::move(language_tag)),
      config_(config) {}

void TaskDescriptor::set_config(const RankingConfig& config) {
  config.validate();
  config_ = config;
}

TaskDescriptor new_task(Mode mode, const RankingConfig& config,
                        std::string language_tag, Timestamp created_at) {
  config.validate();
  // 12 random bytes keep ids short in URLs and directory listings.
  return TaskDescriptor(TaskId("t" + random_token(12)), mode, random_token(32),
                        random_token(32), created_at, std::move(language_tag),
                        config);
}

PhonemeSequence PhonemeSequence::collapsed(std::string clip_id,
                                           const std::vector<Symbol>& raw) {
  PhonemeSequence seq;
  seq.clip_id = std::move(clip_id);
  for (Symbol s : raw) {
    if (seq.symbols.empty() || seq.symbols.back() != s) {
      seq.symbols.push_back(s);
    }
  }
  return seq;
}

std::string_view to_string(UtteranceState state) {
  switch (state) {
    case UtteranceState::Pending: return "pending";
    case UtteranceState::Leased: return "leased";
    case UtteranceState::Annotated: return "annotated";
    case UtteranceState::Skipped: return "skipped";
  }
  return "unknown";
}

std::string_view to_string(UtteranceEvent event) {
  switch (event) {
    case UtteranceEvent::LeaseGranted: return "LeaseGranted";
    case UtteranceEvent::LeaseExpired: return "LeaseExpired";
    case UtteranceEvent::AnnotationFinalized: return "AnnotationFinalized";
    case UtteranceEvent::SkipRequested: return "SkipRequested";
  }
  return "unknown";
}

UtteranceState next_state(UtteranceState state, UtteranceEvent event) {
  using S = UtteranceState;
  using E = UtteranceEvent;
  if (state == S::Pending && event == E::LeaseGranted) return S::Leased;
  if (state == S::Leased) {
    switch (event) {
      case E::LeaseExpired: return S::Pending;
      case E::AnnotationFinalized: return S::Annotated;
      case E::SkipRequested: return S::Skipped;
      case E::LeaseGranted: break;
    }
  }
  throw Error(Errc::IllegalTransition, std::string(to_string(event)) +
                                           " is not legal in state " +
                                           std::string(to_string(state)));
}

Utterance transition_state(Utterance u, UtteranceEvent event) {
  u.state = next_state(u.state, event);
  return u;
}

bool payload_matches(const Utterance& u, Mode mode) {
  return u.is_audio() == (mode == Mode::Transcribe);
}

}  // namespace santlr
