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

#include "riskprop/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskprop/error.hpp"

namespace riskprop {
namespace {

constexpr double kLogClamp = 1e-7;

double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

LogitLoss ffr_loss(std::span<const double> logits) {
  LogitLoss out;
  out.dlogits.assign(logits.size(), 0.0);
  if (logits.size() < 2) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t t = 0; t + 1 < logits.size(); ++t) {
    // logits[t + 1] is a frozen target here; only the current slot is trained.
    const double diff = logits[t] - logits[t + 1];
    out.value += diff * diff;
    out.dlogits[t] = 2.0 * diff;
  }
  return out;
}

double confidence(double a, double a_bar) noexcept { return 2.0 * std::abs(a - a_bar); }

double adaptive_margin(double dt, double c_bar, double delta0) noexcept {
  return delta0 * dt * c_bar;
}

ScoreLoss amc_loss(std::span<const double> scores, std::span<const FramePair> pairs,
                   double a_bar, double delta0) {
  if (pairs.empty()) throw ConfigError("no pairs sampled");
  const std::size_t n = scores.size();
  ScoreLoss out;
  out.dscores.assign(n, 0.0);
  const double inv = 1.0 / static_cast<double>(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (j >= n || i >= j) {
      throw ConfigError("invalid frame pair (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") for " + std::to_string(n) + " frames");
    }
    const double dt = static_cast<double>(j - i) / static_cast<double>(n);
    const double ai = scores[i];
    const double aj = scores[j];
    const double c_bar = 0.5 * (confidence(ai, a_bar) + confidence(aj, a_bar));
    const double hinge = ai - aj + adaptive_margin(dt, c_bar, delta0);
    if (hinge <= 0.0) continue;
    out.value += inv * hinge;
    out.dscores[i] += inv * (1.0 + delta0 * dt * sign(ai - a_bar));
    out.dscores[j] += inv * (-1.0 + delta0 * dt * sign(aj - a_bar));
  }
  return out;
}

ScoreLoss anchored_bce(std::span<const double> scores, const LabelSpec& labels) {
  if (labels.anchors.empty()) throw ConfigError("anchored_bce needs at least one anchor");
  ScoreLoss out;
  out.dscores.assign(scores.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(labels.anchors.size());
  for (const Anchor& anchor : labels.anchors) {
    if (anchor.frame >= scores.size()) {
      throw ConfigError("anchor frame " + std::to_string(anchor.frame) + " out of range");
    }
    double a = scores[anchor.frame];
    if (a < kLogClamp || a > 1.0 - kLogClamp) {
      a = std::clamp(a, kLogClamp, 1.0 - kLogClamp);
      out.clamped = true;
    }
    const double y = anchor.label != 0 ? 1.0 : 0.0;
    out.value -= inv * anchor.weight * (y * std::log(a) + (1.0 - y) * std::log(1.0 - a));
    out.dscores[anchor.frame] += inv * anchor.weight * (a - y) / (a * (1.0 - a));
  }
  return out;
}

double combine(double l_bce, double l_reg, double l_mono, const MarginParams& params) noexcept {
  return l_bce + params.lambda1 * l_reg + params.lambda2 * l_mono;
}

std::vector<double> chain_to_logits(std::span<const double> dscores,
                                    std::span<const double> scores) {
  if (dscores.size() != scores.size()) throw ConfigError("chain_to_logits length mismatch");
  std::vector<double> out(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) {
    out[t] = dscores[t] * scores[t] * (1.0 - scores[t]);
  }
  return out;
}

LossReport sequence_loss(std::span<const double> logits, const LabelSpec& labels,
                         std::span<const FramePair> pairs, std::optional<double> a_bar,
                         const MarginParams& params, LossTerms terms) {
  const std::size_t n = logits.size();
  std::vector<double> scores(n);
  std::transform(logits.begin(), logits.end(), scores.begin(), sigmoid);

  LossReport report;
  const ScoreLoss bce = anchored_bce(scores, labels);
  report.l_bce = bce.value;
  report.bce_clamped = bce.clamped;
  std::vector<double> dscores = bce.dscores;

  if (terms.amc && a_bar && !pairs.empty()) {
    const ScoreLoss mono = amc_loss(scores, pairs, *a_bar, params.delta0);
    report.l_mono = mono.value;
    for (std::size_t t = 0; t < n; ++t) dscores[t] += params.lambda2 * mono.dscores[t];
  }
  report.dlogits = chain_to_logits(dscores, scores);

  if (terms.ffr) {
    const LogitLoss reg = ffr_loss(logits);
    report.l_reg = reg.value;
    report.reg_degenerate = reg.degenerate;
    for (std::size_t t = 0; t < n; ++t) report.dlogits[t] += params.lambda1 * reg.dlogits[t];
  }
  report.total = combine(report.l_bce, report.l_reg, report.l_mono, params);
  return report;
}

}  // namespace riskprop
