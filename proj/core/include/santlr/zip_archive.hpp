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

// Minimal ZIP (stored entries, no compression) writer and reader.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "santlr/model.hpp"

namespace santlr {

struct ZipEntry {
  std::string name;
  std::string data;
};

class ZipWriter {
 public:
  explicit ZipWriter(Timestamp mtime = now_utc());

  void add(std::string name, std::string_view data);
  // Appends the central directory and returns the archive.
  std::string finish();

 private:
  struct Central {
    std::string name;
    std::uint32_t crc;
    std::uint32_t size;
    std::uint32_t offset;
  };
  std::string out_;
  std::vector<Central> central_;
  std::uint16_t dos_time_ = 0;
  std::uint16_t dos_date_ = 0;
};

// Reads archives written by ZipWriter (and any stored-only ZIP32 archive).
// Error InvalidArgument on malformed input or CRC mismatch.
std::vector<ZipEntry> read_zip(std::string_view archive);

}  // namespace santlr
