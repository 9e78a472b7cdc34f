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

#include "santlr/zip_archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>

#include "santlr/errors.hpp"

namespace santlr {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kUtf8Flag = 0x0800;

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xffff));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto chunk = static_cast<uInt>(
        std::min<std::size_t>(data.size() - pos, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + pos), chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

[[noreturn]] void bad(const std::string& what) {
  throw Error(Errc::InvalidArgument, "zip: " + what);
}

struct Reader {
  std::string_view data;

  std::uint16_t u16(std::size_t at) const {
    if (at + 2 > data.size()) bad("truncated");
    return static_cast<std::uint16_t>(
        static_cast<unsigned char>(data[at]) |
        (static_cast<unsigned char>(data[at + 1]) << 8));
  }
  std::uint32_t u32(std::size_t at) const {
    return static_cast<std::uint32_t>(u16(at)) |
           (static_cast<std::uint32_t>(u16(at + 2)) << 16);
  }
  std::string_view bytes(std::size_t at, std::size_t n) const {
    if (at > data.size() || n > data.size() - at) bad("truncated");
    return data.substr(at, n);
  }
};

}  // namespace

ZipWriter::ZipWriter(Timestamp mtime) {
  using namespace std::chrono;
  const auto day = floor<days>(mtime);
  const year_month_day ymd{day};
  const hh_mm_ss tod{floor<seconds>(mtime - day)};
  const int year = std::max(1980, static_cast<int>(ymd.year()));
  dos_date_ = static_cast<std::uint16_t>(((year - 1980) << 9) |
                                         (unsigned(ymd.month()) << 5) |
                                         unsigned(ymd.day()));
  dos_time_ = static_cast<std::uint16_t>((tod.hours().count() << 11) |
                                         (tod.minutes().count() << 5) |
                                         (tod.seconds().count() / 2));
}

void ZipWriter::add(std::string name, std::string_view data) {
  if (data.size() > std::numeric_limits<std::uint32_t>::max() ||
      out_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::InvalidArgument, "zip: entry exceeds 4 GiB");
  }
  const std::uint32_t crc = crc_of(data);
  const auto size = static_cast<std::uint32_t>(data.size());
  const auto offset = static_cast<std::uint32_t>(out_.size());
  put32(out_, kLocalSig);
  put16(out_, 20);
  put16(out_, kUtf8Flag);
  put16(out_, 0);
  put16(out_, dos_time_);
  put16(out_, dos_date_);
  put32(out_, crc);
  put32(out_, size);
  put32(out_, size);
  put16(out_, static_cast<std::uint16_t>(name.size()));
  put16(out_, 0);
  out_ += name;
  out_ += data;
  central_.push_back({std::move(name), crc, size, offset});
}

std::string ZipWriter::finish() {
  const auto cd_offset = static_cast<std::uint32_t>(out_.size());
  for (const auto& c : central_) {
    put32(out_, kCentralSig);
    put16(out_, 20);
    put16(out_, 20);
    put16(out_, kUtf8Flag);
    put16(out_, 0);
    put16(out_, dos_time_);
    put16(out_, dos_date_);
    put32(out_, c.crc);
    put32(out_, c.size);
    put32(out_, c.size);
    put16(out_, static_cast<std::uint16_t>(c.name.size()));
    put16(out_, 0);
    put16(out_, 0);
    put16(out_, 0);
    put16(out_, 0);
    put32(out_, 0);
    put32(out_, c.offset);
    out_ += c.name;
  }
  const auto cd_size = static_cast<std::uint32_t>(out_.size() - cd_offset);
  put32(out_, kEndSig);
  put16(out_, 0);
  put16(out_, 0);
  put16(out_, static_cast<std::uint16_t>(central_.size()));
  put16(out_, static_cast<std::uint16_t>(central_.size()));
  put32(out_, cd_size);
  put32(out_, cd_offset);
  put16(out_, 0);
  central_.clear();
  return std::move(out_);
}

std::vector<ZipEntry> read_zip(std::string_view archive) {
  const Reader r{archive};
  if (archive.size() < 22) bad("too short");
  std::size_t end = std::string_view::npos;
  const std::size_t lowest = archive.size() > 22 + 0xffff ? archive.size() - 22 - 0xffff : 0;
  for (std::size_t at = archive.size() - 22;; --at) {
    if (r.u32(at) == kEndSig) {
      end = at;
      break;
    }
    if (at == lowest) break;
  }
  if (end == std::string_view::npos) bad("no end of central directory");
  const std::size_t count = r.u16(end + 10);
  std::size_t at = r.u32(end + 16);
  std::vector<ZipEntry> entries;
  entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (r.u32(at) != kCentralSig) bad("bad central directory");
    const std::uint16_t method = r.u16(at + 10);
    const std::uint32_t crc = r.u32(at + 16);
    const std::uint32_t csize = r.u32(at + 20);
    const std::uint32_t size = r.u32(at + 24);
    const std::size_t nlen = r.u16(at + 28);
    const std::size_t xlen = r.u16(at + 30);
    const std::size_t clen = r.u16(at + 32);
    const std::size_t local = r.u32(at + 42);
    std::string name(r.bytes(at + 46, nlen));
    at += 46 + nlen + xlen + clen;
    if (method != 0 || csize != size) bad("unsupported compression in " + name);
    if (r.u32(local) != kLocalSig) bad("bad local header for " + name);
    const std::size_t data_at =
        local + 30 + r.u16(local + 26) + r.u16(local + 28);
    std::string_view data = r.bytes(data_at, size);
    if (crc_of(data) != crc) bad("crc mismatch in " + name);
    entries.push_back({std::move(name), std::string(data)});
  }
  return entries;
}

}  // namespace santlr
