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

#include "riskprop/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "riskprop/error.hpp"

namespace riskprop {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ConfigError("feature matrix data size " + std::to_string(data_.size()) +
                      " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void FrameSequence::validate() const {
  const std::size_t n = num_frames();
  if (n < 2) throw ConfigError("sequence needs at least 2 frames");
  if (feature_dim() < 1) throw ConfigError("feature_dim must be >= 1");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("fps must be positive");
  if (is_accident) {
    if (!collision_index) throw ConfigError("accident sequence without collision_index");
    if (*collision_index != n - 1) {
      throw ConfigError("collision_index must be the final frame (" + std::to_string(n - 1) +
                        "), got " + std::to_string(*collision_index));
    }
  } else if (collision_index) {
    throw ConfigError("safe sequence must not carry a collision_index");
  }
  if (onset_index) {
    const std::size_t last = collision_index.value_or(n - 1);
    if (*onset_index > last) throw ConfigError("onset_index past collision_index");
  }
  if (latent_hazard) {
    if (latent_hazard->size() != n) throw ConfigError("latent_hazard length mismatch");
    for (double h : *latent_hazard) {
      if (!(h >= 0.0 && h <= 1.0)) throw ConfigError("latent_hazard outside [0, 1]");
    }
  }
}

Snippet::Snippet(const FeatureMatrix& features, std::size_t t, std::size_t window)
    : features_(&features), t_(t), rows_(window) {
  if (window == 0) throw ConfigError("snippet window must be >= 1");
  if (t >= features.rows()) {
    throw std::out_of_range("frame " + std::to_string(t) + " out of range for " +
                            std::to_string(features.rows()) + " frames");
  }
  // rows_[k] holds frame t - (window - 1) + k, clamped at 0.
  for (std::size_t k = 0; k < window; ++k) {
    const std::size_t back = window - 1 - k;
    rows_[k] = t >= back ? t - back : 0;
  }
}

void Snippet::flatten_into(std::span<double> out) const {
  const std::size_t d = feature_dim();
  if (out.size() != window() * d) throw ConfigError("snippet flatten buffer size mismatch");
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const auto r = features_->row(rows_[k]);
    std::copy(r.begin(), r.end(), out.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
}

std::vector<double> Snippet::flatten() const {
  std::vector<double> out(window() * feature_dim());
  flatten_into(out);
  return out;
}

Snippet make_snippet(const FrameSequence& seq, std::size_t t, std::size_t window) {
  return Snippet(seq.features, t, window);
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

RiskCurve RiskCurve::from_logits(std::vector<double> logits, double fps) {
  RiskCurve curve;
  curve.scores.resize(logits.size());
  std::transform(logits.begin(), logits.end(), curve.scores.begin(), sigmoid);
  curve.logits = std::move(logits);
  curve.fps = fps;
  return curve;
}

}  // namespace riskprop
