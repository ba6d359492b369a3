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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskprop/domain.hpp"

namespace riskprop {

// Start of each seconds-before-collision interval [tau, tau + 0.5).
inline constexpr std::array<double, 4> kBucketStarts = {0.0, 0.5, 1.0, 1.5};
// Intervals averaged into mAUC / mAP.
inline constexpr std::array<std::size_t, 3> kAggregateBuckets = {1, 2, 3};

// Positive clips carry a bucket index into kBucketStarts; negatives do not.
struct EvalClip {
  std::size_t video_id = 0;
  std::optional<std::size_t> bucket;
  double score = 0.0;
  int label = 0;
  std::size_t decision_frame = 0;

  bool operator==(const EvalClip&) const = default;
};

// Frame scored for a bucket: collision - round((tau + 0.25) * fps), or
// nothing when that lands before frame 0.
std::optional<std::size_t> decision_frame(std::size_t collision, std::size_t bucket, double fps);

struct ClipExtraction {
  std::vector<EvalClip> clips;
  std::size_t skipped_buckets = 0;  // (video, bucket) pairs too short to score
};

// One positive clip per accident video and bucket; as many negatives as
// positives, drawn uniformly (with replacement) over all safe-video frames.
ClipExtraction extract_clips(std::span<const RiskCurve> curves,
                             std::span<const FrameSequence> seqs, std::uint64_t seed);

// Fraction of negative scores >= theta. Throws ConfigError when empty.
double far(std::span<const double> negative_scores, double theta);

// Area under the ROC curve over FPR in [0, lambda], ties interpolated
// linearly. Not normalized.
double partial_auc_area(std::span<const double> positive, std::span<const double> negative,
                        double lambda);

// partial_auc_area / lambda, so a perfect ranking scores 1. Empty when
// either class is missing.
std::optional<double> constrained_auc(std::span<const double> positive,
                                      std::span<const double> negative, double lambda);
std::optional<double> constrained_auc(std::span<const EvalClip> clips, double lambda);

// Sum of precision * recall increment over the descending-score operating
// points whose FAR <= lambda. Tied scores form one operating point.
std::optional<double> average_precision(std::span<const double> positive,
                                        std::span<const double> negative, double lambda);
std::optional<double> average_precision(std::span<const EvalClip> clips, double lambda);

// Scores of one accident video up to and including the collision frame.
struct AccidentTrace {
  std::span<const double> scores;
  std::size_t onset = 0;
  std::size_t collision = 0;
  double fps = 10.0;
};

struct MttaResult {
  double value = 0.0;
  std::size_t feasible_thresholds = 0;
  bool flagged = false;  // no threshold satisfied FAR <= lambda
};

// Mean over FAR-feasible thresholds of the mean time-to-collision of the
// first alarm at or after onset. A video without an alarm contributes 0.
MttaResult mtta(std::span<const AccidentTrace> videos, std::span<const double> negative_scores,
                std::span<const double> thresholds, double lambda);

struct BucketMetrics {
  double tau = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::optional<double> auc_l;  // constrained at lambda
  std::optional<double> auc;    // lambda = 1
  std::optional<double> ap;     // constrained at lambda
};

// Each bucket's positives against the shared negative pool.
std::vector<BucketMetrics> bucket_metrics(std::span<const EvalClip> clips, double lambda);

struct MetricReport {
  double lambda = 0.1;
  std::optional<double> mauc_l;
  std::optional<double> mauc;
  std::optional<double> map;
  double mtta_l = 0.0;
  bool mtta_flagged = false;
  std::vector<BucketMetrics> buckets;

  std::string to_json() const;
};

MetricReport aggregate(std::vector<BucketMetrics> buckets, const MttaResult& mtta, double lambda);

// video_id,bucket,score,label,decision_frame  (bucket empty for negatives)
std::string clips_to_csv(std::span<const EvalClip> clips);
std::vector<EvalClip> clips_from_csv(const std::string& text);

}  // namespace riskprop
