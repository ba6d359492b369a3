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

#include "riskprop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "json.hpp"
#include "riskprop/error.hpp"
#include "riskprop/random.hpp"

namespace riskprop {
namespace {

constexpr std::uint64_t kNegativeClipStream = 0xc11f5ULL;

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("FAR limit lambda must lie in (0, 1]");
}

struct Scored {
  double score;
  bool positive;
};

// All clips ordered by descending score; ties stay adjacent.
std::vector<Scored> ranked(std::span<const double> positive, std::span<const double> negative) {
  std::vector<Scored> all;
  all.reserve(positive.size() + negative.size());
  for (double s : positive) all.push_back({s, true});
  for (double s : negative) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  return all;
}

// Calls visit(tp, fp) once per tie block, after the block is consumed.
template <typename Visit>
void sweep(const std::vector<Scored>& all, Visit&& visit) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t k = 0;
  while (k < all.size()) {
    const double s = all[k].score;
    while (k < all.size() && all[k].score == s) {
      (all[k].positive ? tp : fp) += 1;
      ++k;
    }
    if (!visit(tp, fp)) return;
  }
}

void split_clips(std::span<const EvalClip> clips, std::vector<double>& pos, std::vector<double>& neg) {
  for (const auto& c : clips) (c.label != 0 ? pos : neg).push_back(c.score);
}

std::string bucket_key(double tau) {
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%.1f", tau);
  return buf.data();
}

}  // namespace

std::optional<std::size_t> decision_frame(std::size_t collision, std::size_t bucket, double fps) {
  if (bucket >= kBucketStarts.size()) throw ConfigError("bucket index out of range");
  const auto offset = std::llround((kBucketStarts[bucket] + 0.25) * fps);
  if (offset < 0 || static_cast<std::size_t>(offset) > collision) return std::nullopt;
  return collision - static_cast<std::size_t>(offset);
}

ClipExtraction extract_clips(std::span<const RiskCurve> curves, std::span<const FrameSequence> seqs,
                             std::uint64_t seed) {
  if (curves.size() != seqs.size()) throw ConfigError("one curve per sequence required");
  ClipExtraction out;
  std::size_t positives = 0;
  std::vector<std::size_t> safe_videos;
  std::vector<std::size_t> safe_offsets;  // cumulative frame counts
  std::size_t safe_frames = 0;

  for (std::size_t v = 0; v < seqs.size(); ++v) {
    const auto& seq = seqs[v];
    if (curves[v].size() != seq.num_frames()) throw ConfigError("curve length mismatch");
    if (!seq.is_accident) {
      safe_videos.push_back(v);
      safe_offsets.push_back(safe_frames);
      safe_frames += seq.num_frames();
      continue;
    }
    if (!seq.collision_index) throw ConfigError("accident sequence without collision_index");
    for (std::size_t b = 0; b < kBucketStarts.size(); ++b) {
      const auto frame = decision_frame(*seq.collision_index, b, seq.fps);
      if (!frame) {
        ++out.skipped_buckets;
        continue;
      }
      out.clips.push_back({v, b, curves[v].scores[*frame], 1, *frame});
      ++positives;
    }
  }

  if (safe_frames == 0) return out;
  Rng rng(mix_seed(seed, kNegativeClipStream));
  std::uniform_int_distribution<std::size_t> pick(0, safe_frames - 1);
  for (std::size_t k = 0; k < positives; ++k) {
    const std::size_t flat = pick(rng);
    const auto it = std::upper_bound(safe_offsets.begin(), safe_offsets.end(), flat);
    const std::size_t slot = static_cast<std::size_t>(it - safe_offsets.begin()) - 1;
    const std::size_t v = safe_videos[slot];
    const std::size_t frame = flat - safe_offsets[slot];
    out.clips.push_back({v, std::nullopt, curves[v].scores[frame], 0, frame});
  }
  return out;
}

double far(std::span<const double> negative_scores, double theta) {
  if (negative_scores.empty()) throw ConfigError("FAR needs at least one negative clip");
  const auto alarms = std::count_if(negative_scores.begin(), negative_scores.end(),
                                    [theta](double s) { return s >= theta; });
  return static_cast<double>(alarms) / static_cast<double>(negative_scores.size());
}

double partial_auc_area(std::span<const double> positive, std::span<const double> negative,
                        double lambda) {
  check_lambda(lambda);
  if (positive.empty() || negative.empty()) return 0.0;
  const double p = static_cast<double>(positive.size());
  const double n = static_cast<double>(negative.size());
  double area = 0.0;
  double fpr0 = 0.0;
  double tpr0 = 0.0;
  sweep(ranked(positive, negative), [&](std::size_t tp, std::size_t fp) {
    const double fpr1 = static_cast<double>(fp) / n;
    const double tpr1 = static_cast<double>(tp) / p;
    if (fpr1 <= lambda) {
      area += (fpr1 - fpr0) * (tpr0 + tpr1) * 0.5;
    } else {
      // Segment crosses the FAR limit: integrate up to lambda only.
      const double tpr_at = tpr0 + (tpr1 - tpr0) * (lambda - fpr0) / (fpr1 - fpr0);
      area += (lambda - fpr0) * (tpr0 + tpr_at) * 0.5;
      return false;
    }
    fpr0 = fpr1;
    tpr0 = tpr1;
    return true;
  });
  return area;
}

std::optional<double> constrained_auc(std::span<const double> positive,
                                      std::span<const double> negative, double lambda) {
  check_lambda(lambda);
  if (positive.empty() || negative.empty()) return std::nullopt;
  return partial_auc_area(positive, negative, lambda) / lambda;
}

std::optional<double> constrained_auc(std::span<const EvalClip> clips, double lambda) {
  std::vector<double> pos;
  std::vector<double> neg;
  split_clips(clips, pos, neg);
  return constrained_auc(pos, neg, lambda);
}

std::optional<double> average_precision(std::span<const double> positive,
                                        std::span<const double> negative, double lambda) {
  check_lambda(lambda);
  if (positive.empty() || negative.empty()) return std::nullopt;
  const double p = static_cast<double>(positive.size());
  const double n = static_cast<double>(negative.size());
  double ap = 0.0;
  double prev_recall = 0.0;
  sweep(ranked(positive, negative), [&](std::size_t tp, std::size_t fp) {
    if (static_cast<double>(fp) / n > lambda) return false;
    const double recall = static_cast<double>(tp) / p;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    return true;
  });
  return ap;
}

std::optional<double> average_precision(std::span<const EvalClip> clips, double lambda) {
  std::vector<double> pos;
  std::vector<double> neg;
  split_clips(clips, pos, neg);
  return average_precision(pos, neg, lambda);
}

MttaResult mtta(std::span<const AccidentTrace> videos, std::span<const double> negative_scores,
                std::span<const double> thresholds, double lambda) {
  check_lambda(lambda);
  MttaResult result;
  if (negative_scores.empty() || videos.empty()) {
    result.flagged = true;
    return result;
  }
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> theta(thresholds.begin(), thresholds.end());
  std::sort(theta.begin(), theta.end());
  theta.erase(std::unique(theta.begin(), theta.end()), theta.end());

  // Running maximum from onset: the first alarm for threshold t is the first
  // position where it reaches t.
  std::vector<std::vector<double>> running(videos.size());
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const auto& trace = videos[v];
    if (trace.onset > trace.collision || trace.collision >= trace.scores.size()) {
      throw ConfigError("accident trace needs onset <= collision < length");
    }
    auto& rm = running[v];
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = trace.onset; t <= trace.collision; ++t) {
      best = std::max(best, trace.scores[t]);
      rm.push_back(best);
    }
  }

  const double n = static_cast<double>(neg.size());
  double sum = 0.0;
  for (double t : theta) {
    const auto below = std::lower_bound(neg.begin(), neg.end(), t) - neg.begin();
    const double far_t = (n - static_cast<double>(below)) / n;
    if (far_t > lambda) continue;
    double tta_sum = 0.0;
    for (std::size_t v = 0; v < videos.size(); ++v) {
      const auto& rm = running[v];
      const auto hit = std::lower_bound(rm.begin(), rm.end(), t);
      if (hit == rm.end()) continue;
      const std::size_t alarm = videos[v].onset + static_cast<std::size_t>(hit - rm.begin());
      tta_sum += static_cast<double>(videos[v].collision - alarm) / videos[v].fps;
    }
    sum += tta_sum / static_cast<double>(videos.size());
    ++result.feasible_thresholds;
  }
  if (result.feasible_thresholds == 0) {
    result.flagged = true;
    return result;
  }
  result.value = sum / static_cast<double>(result.feasible_thresholds);
  return result;
}

std::vector<BucketMetrics> bucket_metrics(std::span<const EvalClip> clips, double lambda) {
  check_lambda(lambda);
  std::vector<double> neg;
  for (const auto& c : clips) {
    if (c.label == 0) neg.push_back(c.score);
  }
  std::vector<BucketMetrics> out;
  for (std::size_t b = 0; b < kBucketStarts.size(); ++b) {
    std::vector<double> pos;
    for (const auto& c : clips) {
      if (c.label != 0 && c.bucket == b) pos.push_back(c.score);
    }
    BucketMetrics m;
    m.tau = kBucketStarts[b];
    m.positives = pos.size();
    m.negatives = neg.size();
    m.auc_l = constrained_auc(pos, neg, lambda);
    m.auc = constrained_auc(pos, neg, 1.0);
    m.ap = average_precision(pos, neg, lambda);
    out.push_back(m);
  }
  return out;
}

MetricReport aggregate(std::vector<BucketMetrics> buckets, const MttaResult& mtta_result,
                       double lambda) {
  MetricReport report;
  report.lambda = lambda;
  report.mtta_l = mtta_result.value;
  report.mtta_flagged = mtta_result.flagged;
  auto mean_of = [&](std::optional<double> BucketMetrics::*field) -> std::optional<double> {
    double sum = 0.0;
    for (std::size_t b : kAggregateBuckets) {
      const auto it = std::find_if(buckets.begin(), buckets.end(), [&](const BucketMetrics& m) {
        return m.tau == kBucketStarts[b];
      });
      if (it == buckets.end() || !((*it).*field)) return std::nullopt;
      sum += *((*it).*field);
    }
    return sum / static_cast<double>(kAggregateBuckets.size());
  };
  report.mauc_l = mean_of(&BucketMetrics::auc_l);
  report.mauc = mean_of(&BucketMetrics::auc);
  report.map = mean_of(&BucketMetrics::ap);
  report.buckets = std::move(buckets);
  return report;
}

std::string MetricReport::to_json() const {
  using Json = nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["mauc_l"] = opt(mauc_l);
  j["mauc"] = opt(mauc);
  j["map"] = opt(map);
  j["mtta_l"] = mtta_l;
  Json per = Json::object();
  for (const auto& b : buckets) {
    Json e;
    e["auc_l"] = opt(b.auc_l);
    e["auc"] = opt(b.auc);
    e["ap"] = opt(b.ap);
    e["positives"] = b.positives;
    e["negatives"] = b.negatives;
    per[bucket_key(b.tau)] = std::move(e);
  }
  j["per_bucket"] = std::move(per);
  j["lambda"] = lambda;
  j["mtta_flagged"] = mtta_flagged;
  return j.dump(2);
}

std::string clips_to_csv(std::span<const EvalClip> clips) {
  std::string out = "video_id,bucket,score,label,decision_frame\n";
  std::array<char, 64> num{};
  for (const auto& c : clips) {
    out += std::to_string(c.video_id);
    out += ',';
    if (c.bucket) out += bucket_key(kBucketStarts[*c.bucket]);
    out += ',';
    std::snprintf(num.data(), num.size(), "%.17g", c.score);
    out += num.data();
    out += ',';
    out += std::to_string(c.label);
    out += ',';
    out += std::to_string(c.decision_frame);
    out += '\n';
  }
  return out;
}

std::vector<EvalClip> clips_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;
  std::vector<EvalClip> clips;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_number == 1) {
      if (line != "video_id,bucket,score,label,decision_frame") {
        throw ParseError("unexpected clip CSV header", line_number);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) throw ParseError("expected 5 columns", line_number);
    try {
      EvalClip c;
      c.video_id = std::stoul(cells[0]);
      if (!cells[1].empty()) {
        const double tau = std::stod(cells[1]);
        const auto it = std::find(kBucketStarts.begin(), kBucketStarts.end(), tau);
        if (it == kBucketStarts.end()) throw ParseError("unknown bucket " + cells[1], line_number);
        c.bucket = static_cast<std::size_t>(it - kBucketStarts.begin());
      }
      c.score = std::stod(cells[2]);
      c.label = std::stoi(cells[3]);
      c.decision_frame = std::stoul(cells[4]);
      clips.push_back(c);
    } catch (const std::logic_error&) {
      throw ParseError("malformed clip row", line_number);
    }
  }
  return clips;
}

}  // namespace riskprop
