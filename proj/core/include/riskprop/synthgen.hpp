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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "riskprop/domain.hpp"

namespace riskprop {

enum class RampShape { Linear, Sigmoid };

struct GenConfig {
  std::size_t num_accident = 200;
  std::size_t num_safe = 200;
  std::size_t frames_per_video = 120;
  std::size_t feature_dim = 8;
  std::size_t signal_dims = 2;
  double noise_sigma = 0.3;
  double onset_lo = 0.3;  // onset fraction range
  double onset_hi = 0.8;
  RampShape ramp_shape = RampShape::Sigmoid;
  double ramp_steepness = 10.0;  // logistic slope of the Sigmoid ramp
  double fps = 10.0;
  double distractor_fraction = 0.3;  // share of safe videos with a bump
  double distractor_amplitude = 1.5;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Hazard at frame t for an accident with the given onset and collision
// frames: 0 before onset, rising to exactly 1 at collision.
double hazard_ramp(std::size_t t, std::size_t onset, std::size_t collision, RampShape shape,
                   double steepness = 10.0);

// Accident videos first, then safe videos. Each video draws from its own
// stream derived from cfg.seed, so output does not depend on generation order.
std::vector<FrameSequence> generate(const GenConfig& cfg);

struct DatasetSplit {
  std::vector<FrameSequence> train;
  std::vector<FrameSequence> test;
};

// Stratified by class; no sequence straddles the split.
DatasetSplit split_dataset(std::vector<FrameSequence> seqs, double train_fraction,
                           std::uint64_t seed);

// JSON-lines sequence format.
std::string to_json_line(const FrameSequence& seq);
FrameSequence from_json_line(const std::string& line, std::size_t line_number = 0);

void write_dataset(const std::vector<FrameSequence>& seqs, const std::filesystem::path& path);
std::vector<FrameSequence> read_dataset(const std::filesystem::path& path);

std::string to_json(const GenConfig& cfg);
// Fields absent from the JSON keep their value in `base`.
GenConfig gen_config_from_json(const std::string& text, GenConfig base = {});

std::string ramp_shape_name(RampShape shape);
RampShape parse_ramp_shape(const std::string& name);

}  // namespace riskprop
