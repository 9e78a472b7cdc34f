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

namespace santlr {

// Free parameters of the multi-step ranking. Weights are additive on a
// min-max normalized base score; see ranking.hpp.
struct RankingConfig {
  double w_snr = 0.5;
  double w_overlap = 1.0;
  double snr_target_db = 20.0;
  double overlap_threshold = 0.8;
  int lm_order = 3;
  double lm_add_k = 0.1;
  double text_dup_threshold = 0.8;

  // Throws Error(InvalidArgument) naming the first out-of-range field.
  void validate() const;

  bool operator==(const RankingConfig&) const = default;
};

}  // namespace santlr
