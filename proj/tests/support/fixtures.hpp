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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "riskprop/domain.hpp"
#include "riskprop/random.hpp"

namespace riskprop::fixture {

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Random features; accident sequences get an onset and a linear hazard so
// every labeling strategy applies.
inline FrameSequence random_sequence(Rng& rng, std::size_t frames, std::size_t dim, bool accident,
                                     double scale = 1.0) {
  FrameSequence seq;
  seq.features = FeatureMatrix(frames, dim, uniform_vector(rng, frames * dim, -scale, scale));
  seq.is_accident = accident;
  std::vector<double> h(frames, 0.0);
  if (accident) {
    const std::size_t collision = frames - 1;
    const std::size_t onset = std::uniform_int_distribution<std::size_t>(0, collision)(rng);
    seq.collision_index = collision;
    seq.onset_index = onset;
    for (std::size_t t = onset; t < frames; ++t) {
      h[t] = collision == onset ? 1.0
                                : static_cast<double>(t - onset) / static_cast<double>(collision - onset);
    }
  }
  seq.latent_hazard = h;
  return seq;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("riskprop_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace riskprop::fixture
