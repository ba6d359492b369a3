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
#include <optional>
#include <span>
#include <vector>

#include "riskprop/domain.hpp"

namespace riskprop {

// Margin scale and balancing weights of the total objective.
struct MarginParams {
  double delta0 = 0.01;
  double lambda1 = 1.5;  // future-frame regularization
  double lambda2 = 1.1;  // monotonic constraint
};

struct LossReport {
  double l_bce = 0.0;
  double l_reg = 0.0;
  double l_mono = 0.0;
  double total = 0.0;
  std::vector<double> dlogits;  // d(total)/dz_t
  bool bce_clamped = false;
  bool reg_degenerate = false;
};

struct LogitLoss {
  double value = 0.0;
  std::vector<double> dlogits;
  bool degenerate = false;  // fewer than two frames
};

struct ScoreLoss {
  double value = 0.0;
  std::vector<double> dscores;
  bool clamped = false;  // a score hit the log clamp
};

// Future-frame regularization: sum_t (stopgrad(z_{t+1}) - z_t)^2.
// The target slot carries no gradient, so dlogits.back() is always 0.
LogitLoss ffr_loss(std::span<const double> logits);

// c = 2 |a - a_bar|
double confidence(double a, double a_bar) noexcept;

// delta = delta0 * dt * c_bar, dt being the frame gap normalized by length.
double adaptive_margin(double dt, double c_bar, double delta0) noexcept;

// Mean hinge max(0, a_i - a_j + delta) over the sampled pairs. a_bar is a
// constant for differentiation. Throws ConfigError on an empty pair list or
// invalid indices.
ScoreLoss amc_loss(std::span<const double> scores, std::span<const FramePair> pairs,
                   double a_bar, double delta0);

// Weighted BCE over the anchored frames, averaged over |S|. Scores are
// clamped to [1e-7, 1 - 1e-7] before the log.
ScoreLoss anchored_bce(std::span<const double> scores, const LabelSpec& labels);

double combine(double l_bce, double l_reg, double l_mono, const MarginParams& params) noexcept;

// dL/dz_t = dL/da_t * a_t (1 - a_t)
std::vector<double> chain_to_logits(std::span<const double> dscores,
                                    std::span<const double> scores);

// Which terms enter a sequence's loss. Safe videos use BCE only.
struct LossTerms {
  bool ffr = true;
  bool amc = true;
};

// Full per-sequence objective from logits: BCE on the anchors, FFR over the
// whole curve and AMC on the given pairs (skipped when a_bar is empty).
LossReport sequence_loss(std::span<const double> logits, const LabelSpec& labels,
                         std::span<const FramePair> pairs, std::optional<double> a_bar,
                         const MarginParams& params, LossTerms terms);

}  // namespace riskprop
