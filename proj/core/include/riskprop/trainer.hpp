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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskprop/domain.hpp"
#include "riskprop/losses.hpp"
#include "riskprop/metrics.hpp"
#include "riskprop/pair_sampler.hpp"
#include "riskprop/scorer.hpp"

namespace riskprop {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double lr0 = 0.002;
  double lr_decay = 0.1;
  std::size_t lr_step_epochs = 20;
  std::size_t window = 5;
  ScorerKind scorer = ScorerKind::Linear;
  std::size_t hidden = 16;
  LabelingStrategy labeling = LabelingStrategy::only_collision();
  MarginParams margin;
  double w_pos = 10.0;
  double w_neg = 1.0;
  SamplerConfig sampler;
  bool ffr_enabled = true;
  bool amc_enabled = true;
  std::uint64_t seed = 0;
  std::string nan_dump_path;  // batch written here on a non-finite loss

  void validate() const;
  ScorerShape scorer_shape(std::size_t feature_dim) const;
};

std::string to_json(const TrainConfig& cfg);
// Fields absent from the JSON keep their value in `base`.
TrainConfig train_config_from_json(const std::string& text, TrainConfig base = {});

std::string labeling_name(const LabelingStrategy& strategy);
LabelingStrategy parse_labeling(const std::string& name, double interval_seconds = 2.0);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double l_bce = 0.0;
  double l_reg = 0.0;
  double l_mono = 0.0;
  double total = 0.0;
  std::optional<double> val_mauc;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  // epoch,l_bce,l_reg,l_mono,total,val_mauc,seconds
  std::string to_csv() const;
};

// Causal sliding-window inference over every frame. When tapes is non-null
// it receives one activation record per frame.
RiskCurve score_sequence(const Scorer& scorer, const FrameSequence& seq, std::size_t window,
                         std::vector<Tape>* tapes = nullptr);

// Mean score over every frame of every accident curve; empty when the batch
// has no accident video.
std::optional<double> batch_mean_abar(std::span<const RiskCurve> curves,
                                      const std::vector<bool>& is_accident);

// Anchor set of the weighted BCE term. Safe videos anchor every frame at
// label 0 regardless of strategy.
LabelSpec labeling(const FrameSequence& seq, const LabelingStrategy& strategy, double w_pos,
                   double w_neg);

// lr0 * decay^floor(epoch / step), epochs counted from 0.
double learning_rate(const TrainConfig& cfg, std::size_t epoch);

// Pre-drawn randomness of one batch, so evaluate_batch is a pure function of
// the parameters.
struct BatchPlan {
  std::vector<std::vector<FramePair>> pairs;  // per batch member; empty for safe videos
  std::optional<double> frozen_abar;          // overrides the computed batch mean
};

struct BatchResult {
  double l_bce = 0.0;  // means over the batch members
  double l_reg = 0.0;
  double l_mono = 0.0;
  double total = 0.0;
  std::optional<double> abar;
  std::vector<double> grads;  // d(mean total)/d(params)
  bool bce_clamped = false;
};

BatchResult evaluate_batch(const Scorer& scorer, std::span<const FrameSequence* const> batch,
                           const BatchPlan& plan, const TrainConfig& cfg,
                           std::size_t workers = 1);

// Draws pairs for every accident member when AMC is enabled.
BatchPlan plan_batch(std::span<const FrameSequence* const> batch, const TrainConfig& cfg,
                     Rng& pair_rng);

// Per-run random streams: shuffling and pair sampling.
struct TrainStreams {
  Rng shuffle;
  Rng pairs;

  explicit TrainStreams(const TrainConfig& cfg);
};

// One pass over the data: shuffle, then one SGD step per batch.
// Throws TrainingError on a non-finite batch loss.
EpochRecord train_epoch(Scorer& scorer, std::span<const FrameSequence> data,
                        const TrainConfig& cfg, std::size_t epoch, TrainStreams& streams,
                        std::size_t workers = 1);

struct EvalOptions {
  double lambda = 0.1;
  std::uint64_t seed = 0;  // negative clip sampling
};

struct ModelEvaluation {
  MetricReport report;
  std::vector<EvalClip> clips;
  std::vector<RiskCurve> curves;
};

ModelEvaluation evaluate_model(const Scorer& scorer, std::span<const FrameSequence> data,
                               std::size_t window, const EvalOptions& options);

// Full training run from a freshly initialized scorer. When validation is
// non-empty each epoch records its mAUC at options.lambda.
struct TrainResult {
  Scorer scorer;
  TrainLog log;
};

TrainResult train(std::span<const FrameSequence> data, const TrainConfig& cfg,
                  std::span<const FrameSequence> validation = {},
                  const EvalOptions& val_options = {}, std::size_t workers = 1);

}  // namespace riskprop
