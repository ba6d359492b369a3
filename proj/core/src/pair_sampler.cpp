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

#include "riskprop/pair_sampler.hpp"

#include <cmath>
#include <string>

#include "riskprop/error.hpp"

namespace riskprop {

void SamplerConfig::validate() const {
  if (!(d_min > 0.0 && d_min <= d_max && d_max < 1.0)) {
    throw ConfigError("sampler offsets need 0 < d_min <= d_max < 1");
  }
  if (pairs_per_sequence == 0) throw ConfigError("pairs_per_sequence must be >= 1");
}

SampledPair sample_pair(std::size_t num_frames, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  const double n = static_cast<double>(num_frames);
  if (num_frames < 2 || cfg.d_min * n < 1.0) {
    throw ConfigError("sequence shorter than minimum offset (" + std::to_string(num_frames) +
                      " frames, d_min " + std::to_string(cfg.d_min) + ")");
  }
  std::uniform_real_distribution<double> offset(cfg.d_min, cfg.d_max);
  while (true) {
    const double d = offset(rng);
    const auto last_start = static_cast<std::size_t>(std::floor(n * (1.0 - d)));
    std::uniform_int_distribution<std::size_t> start(0, last_start);
    const std::size_t i = start(rng);
    const auto gap = static_cast<std::size_t>(std::llround(d * n));
    const std::size_t j = std::min(i + gap, num_frames - 1);
    // Only reachable when d*T rounds to exactly 1 and i lands on the last frame.
    if (j > i) return {{i, j}, d};
  }
}

std::vector<FramePair> sample_pairs(std::size_t num_frames, const SamplerConfig& cfg, Rng& rng) {
  std::vector<FramePair> pairs;
  pairs.reserve(cfg.pairs_per_sequence);
  for (std::size_t k = 0; k < cfg.pairs_per_sequence; ++k) {
    pairs.push_back(sample_pair(num_frames, cfg, rng).pair);
  }
  return pairs;
}

}  // namespace riskprop
