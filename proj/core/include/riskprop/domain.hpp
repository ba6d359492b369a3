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

namespace riskprop {

// Row-major dense matrix of per-frame features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// One video: encoded per-frame features plus the label anchors.
//
// Accident videos end at the collision frame, so collision_index is always
// num_frames() - 1 when present. onset_index is consumed by metrics only.
struct FrameSequence {
  FeatureMatrix features;
  double fps = 10.0;
  bool is_accident = false;
  std::optional<std::size_t> collision_index;
  std::optional<std::size_t> onset_index;
  std::optional<std::vector<double>> latent_hazard;

  std::size_t num_frames() const noexcept { return features.rows(); }
  std::size_t feature_dim() const noexcept { return features.cols(); }

  // Throws ConfigError when any structural invariant is violated.
  void validate() const;

  bool operator==(const FrameSequence&) const = default;
};

// O consecutive feature rows ending at frame t. Rows before frame 0 repeat
// frame 0, so the window length is fixed for every t.
class Snippet {
 public:
  Snippet(const FeatureMatrix& features, std::size_t t, std::size_t window);

  std::size_t t() const noexcept { return t_; }
  std::size_t window() const noexcept { return rows_.size(); }
  std::size_t feature_dim() const noexcept { return features_->cols(); }
  std::span<const std::size_t> row_indices() const noexcept { return rows_; }
  std::span<const double> row(std::size_t k) const { return features_->row(rows_[k]); }

  // Oldest frame first; out.size() must equal window() * feature_dim().
  void flatten_into(std::span<double> out) const;
  std::vector<double> flatten() const;

 private:
  const FeatureMatrix* features_;
  std::size_t t_;
  std::vector<std::size_t> rows_;
};

// Throws std::out_of_range for t >= num_frames, ConfigError for window == 0.
Snippet make_snippet(const FrameSequence& seq, std::size_t t, std::size_t window);

double sigmoid(double z) noexcept;

// Per-frame logits z_t and risk scores a_t = sigmoid(z_t).
struct RiskCurve {
  std::vector<double> logits;
  std::vector<double> scores;
  double fps = 10.0;

  static RiskCurve from_logits(std::vector<double> logits, double fps);
  std::size_t size() const noexcept { return logits.size(); }
};

struct Anchor {
  std::size_t frame = 0;
  int label = 0;
  double weight = 1.0;

  bool operator==(const Anchor&) const = default;
};

struct LabelingStrategy {
  enum class Kind { OnlyCollision, FixedInterval, AnomalyOnset };

  Kind kind = Kind::OnlyCollision;
  double seconds = 2.0;  // FixedInterval window length

  static LabelingStrategy only_collision() { return {Kind::OnlyCollision, 0.0}; }
  static LabelingStrategy fixed_interval(double s) { return {Kind::FixedInterval, s}; }
  static LabelingStrategy anomaly_onset() { return {Kind::AnomalyOnset, 0.0}; }
};

// The anchored frame set of the weighted BCE term.
struct LabelSpec {
  std::vector<Anchor> anchors;
  LabelingStrategy strategy;
};

// An ordered frame pair (i < j) for the monotonic constraint.
struct FramePair {
  std::size_t i = 0;
  std::size_t j = 0;

  bool operator==(const FramePair&) const = default;
};

}  // namespace riskprop
