// Copyright 2026 The RiskProp Authors. All Rights Reserved.
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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "riskprop/domain.hpp"
#include "riskprop/random.hpp"

namespace riskprop {

struct SamplerConfig {
  double d_min = 0.1;
  double d_max = 0.9;
  std::size_t pairs_per_sequence = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SampledPair {
  FramePair pair;
  double offset = 0.0;  // the drawn normalized offset d
};

// Draws d ~ U[d_min, d_max], i ~ U{0..floor(T(1-d))}, j = i + round(dT)
// clamped to T-1. Throws ConfigError when d_min * T < 1.
SampledPair sample_pair(std::size_t num_frames, const SamplerConfig& cfg, Rng& rng);

// cfg.pairs_per_sequence draws with replacement.
std::vector<FramePair> sample_pairs(std::size_t num_frames, const SamplerConfig& cfg, Rng& rng);

}  // namespace riskprop
