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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskprop/metrics.hpp"
#include "riskprop/scorer.hpp"
#include "riskprop/synthgen.hpp"
#include "riskprop/trainer.hpp"

namespace riskprop::app {

namespace fs = std::filesystem;

inline constexpr const char* kTrainFile = "train.jsonl";
inline constexpr const char* kTestFile = "test.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCheckpointFile = "checkpoint.json";

// Fingerprint of a dataset directory (train then test file bytes).
std::string dataset_hash(const fs::path& data_dir);

std::vector<FrameSequence> load_split(const fs::path& data_dir, const std::string& split);

// Writes train/test JSONL and a manifest under out.
void cmd_gen(const GenConfig& cfg, const fs::path& out);

struct TrainRequest {
  fs::path data;
  fs::path out;
  TrainConfig cfg;
  bool validate = true;  // per-epoch mAUC on the test split
};

// Writes checkpoint.json, train_log.csv, config.json and a manifest.
TrainLog cmd_train(const TrainRequest& request);

struct EvalRequest {
  fs::path data;
  fs::path checkpoint;  // checkpoint file or a directory holding one
  fs::path out;
  std::string split = "test";
  double lambda = 0.1;
  std::uint64_t seed = 0;
  bool force = false;  // skip the dataset fingerprint check
};

// Writes report.json and clips.csv. Throws when the dataset does not match
// the checkpoint's manifest and force is false.
MetricReport cmd_eval(const EvalRequest& request);

struct CurvesRequest {
  fs::path data;
  fs::path checkpoint;
  fs::path out;
  std::string split = "test";
  double threshold = 0.5;
  std::size_t max_plots = 0;  // 0 plots every video
};

// Per-video CSV and SVG plus the collision-aligned dataset mean curve.
void cmd_curves(const CurvesRequest& request);

struct AblationCell {
  int exp = 1;  // 1..4 = {BCE, +AMC, +FFR, +FFR+AMC}
  LabelingStrategy labeling;
  std::optional<MetricReport> report;
  std::optional<Scorer> scorer;
  std::string error;

  bool ffr() const noexcept { return exp >= 3; }
  bool amc() const noexcept { return exp == 2 || exp == 4; }
};

// The 4 x 3 grid in table order: Exp I..IV within onset, interval, collision.
std::vector<AblationCell> run_ablation(std::span<const FrameSequence> train,
                                       std::span<const FrameSequence> test,
                                       const TrainConfig& base, const EvalOptions& eval,
                                       std::size_t workers);

std::string ablation_csv(std::span<const AblationCell> cells);
std::string ablation_table(std::span<const AblationCell> cells);

struct AblateRequest {
  fs::path data;
  fs::path out;
  TrainConfig base;
  double lambda = 0.1;
  std::size_t workers = 1;
};

std::vector<AblationCell> cmd_ablate(const AblateRequest& request);

// Command-line entry point. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace riskprop::app
