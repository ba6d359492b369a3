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

#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "riskprop/error.hpp"
#include "riskprop/metrics.hpp"

namespace riskprop {
namespace {

using Scores = std::vector<double>;

// ---- clip extraction

TEST(DecisionFrame, BucketMidpoints) {
  EXPECT_EQ(decision_frame(119, 1, 10.0), 111u);
  EXPECT_EQ(decision_frame(119, 0, 10.0), 116u);  // llround(2.5) = 3
  EXPECT_EQ(decision_frame(119, 2, 10.0), 106u);
  EXPECT_EQ(decision_frame(119, 3, 10.0), 101u);  // llround(17.5) = 18
  EXPECT_EQ(decision_frame(17, 3, 10.0), std::nullopt);
  EXPECT_EQ(decision_frame(18, 3, 10.0), 0u);
  EXPECT_THROW(decision_frame(119, 4, 10.0), ConfigError);
}

struct Corpus {
  std::vector<FrameSequence> seqs;
  std::vector<RiskCurve> curves;
};

Corpus corpus(Rng& rng, std::size_t accidents, std::size_t safe, std::size_t frames) {
  Corpus c;
  for (std::size_t v = 0; v < accidents + safe; ++v) {
    c.seqs.push_back(fixture::random_sequence(rng, frames, 1, v < accidents));
    c.curves.push_back(RiskCurve::from_logits(fixture::uniform_vector(rng, frames, -3, 3), 10.0));
  }
  return c;
}

TEST(ExtractClips, Counts) {
  Rng rng(1);
  const auto c = corpus(rng, 7, 5, 40);
  const auto out = extract_clips(c.curves, c.seqs, 3);
  EXPECT_EQ(out.skipped_buckets, 0u);
  std::size_t pos = 0;
  std::size_t neg = 0;
  std::array<std::size_t, 4> per_bucket{};
  for (const auto& clip : out.clips) {
    const auto& seq = c.seqs[clip.video_id];
    if (clip.label == 1) {
      ++pos;
      ASSERT_TRUE(clip.bucket);
      ASSERT_TRUE(seq.is_accident);
      ++per_bucket[*clip.bucket];
      EXPECT_EQ(clip.decision_frame, *decision_frame(39, *clip.bucket, 10.0));
    } else {
      ++neg;
      EXPECT_FALSE(clip.bucket);
      EXPECT_FALSE(seq.is_accident);
      ASSERT_LT(clip.decision_frame, 40u);
    }
    EXPECT_EQ(clip.score, c.curves[clip.video_id].scores[clip.decision_frame]);
  }
  EXPECT_EQ(pos, 28u);
  EXPECT_EQ(neg, pos);
  for (auto n : per_bucket) EXPECT_EQ(n, 7u);
}

TEST(ExtractClips, ShortVideosSkipBuckets) {
  Rng rng(2);
  // Collision at 11: the 1.25 s and 1.75 s buckets reach back 13 and 18 frames.
  const auto c = corpus(rng, 3, 2, 12);
  const auto out = extract_clips(c.curves, c.seqs, 3);
  EXPECT_EQ(out.skipped_buckets, 6u);
  EXPECT_EQ(std::count_if(out.clips.begin(), out.clips.end(), [](const EvalClip& x) { return x.label == 1; }),
            6);
}

TEST(ExtractClips, SafeVideosNeverPositiveAndSeeded) {
  Rng rng(3);
  const auto c = corpus(rng, 0, 6, 30);
  EXPECT_TRUE(extract_clips(c.curves, c.seqs, 1).clips.empty());
  const auto d = corpus(rng, 4, 4, 30);
  EXPECT_EQ(extract_clips(d.curves, d.seqs, 9).clips, extract_clips(d.curves, d.seqs, 9).clips);
  EXPECT_NE(extract_clips(d.curves, d.seqs, 9).clips, extract_clips(d.curves, d.seqs, 10).clips);
}

TEST(ExtractClips, NegativesCoverSafeFramesUniformly) {
  Rng rng(4);
  auto c = corpus(rng, 250, 2, 30);  // 1000 negatives from 60 safe frames
  c.seqs[251].features = FeatureMatrix(90, 1);
  c.seqs[251].latent_hazard = Scores(90, 0.0);
  c.curves[251] = RiskCurve::from_logits(Scores(90, 0.0), 10.0);
  const auto out = extract_clips(c.curves, c.seqs, 5);
  double from_long = 0.0;
  double total = 0.0;
  for (const auto& clip : out.clips) {
    if (clip.label != 0) continue;
    total += 1.0;
    from_long += clip.video_id == 251 ? 1.0 : 0.0;
  }
  // 90 of 120 safe frames belong to the long video.
  EXPECT_NEAR(from_long / total, 0.75, 0.05);
}

// ---- FAR, AUC, AP examples

TEST(Far, Examples) {
  const Scores neg = {0.1, 0.2, 0.9, 0.95};
  EXPECT_EQ(far(neg, 0.99), 0.0);
  EXPECT_EQ(far(neg, 0.0), 1.0);
  EXPECT_EQ(far(neg, 0.5), 0.5);
  EXPECT_EQ(far(neg, 0.9), 0.5);  // alarm at score >= theta
  EXPECT_THROW(far(Scores{}, 0.5), ConfigError);
}

TEST(ConstrainedAuc, PerfectSeparation) {
  for (double lambda : {0.05, 0.1, 0.5, 1.0}) {
    EXPECT_EQ(*constrained_auc(Scores{0.7, 0.8, 0.9}, Scores{0.1, 0.2, 0.6}, lambda), 1.0);
  }
}

TEST(ConstrainedAuc, AllTiedIsDiagonal) {
  // The tied block is one ROC segment along the diagonal, so the area up to
  // FPR = lambda is lambda^2 / 2 and the normalized value is lambda / 2.
  const Scores pos(4, 0.5);
  const Scores neg(6, 0.5);
  EXPECT_DOUBLE_EQ(*constrained_auc(pos, neg, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(*constrained_auc(pos, neg, 0.1), 0.05);
}

TEST(ConstrainedAuc, DegenerateBucketIsMissing) {
  EXPECT_FALSE(constrained_auc(Scores{}, Scores{0.1}, 0.1));
  EXPECT_FALSE(constrained_auc(Scores{0.1}, Scores{}, 0.1));
  EXPECT_FALSE(average_precision(Scores{}, Scores{0.1}, 0.1));
  EXPECT_THROW(constrained_auc(Scores{0.1}, Scores{0.2}, 0.0), ConfigError);
  EXPECT_THROW(constrained_auc(Scores{0.1}, Scores{0.2}, 1.5), ConfigError);
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(*average_precision(Scores{0.7, 0.9}, Scores{0.1, 0.2}, 0.1), 1.0);
  Scores neg;
  for (int k = 0; k < 9; ++k) neg.push_back(0.5 + 0.05 * k);
  EXPECT_DOUBLE_EQ(*average_precision(Scores{0.1}, neg, 1.0), 0.1);
}

TEST(ClipOverloads, AgreeWithScoreOverloads) {
  const std::vector<EvalClip> clips = {
      {0, 1, 0.9, 1, 0}, {1, 1, 0.3, 1, 0}, {2, std::nullopt, 0.4, 0, 0}, {3, std::nullopt, 0.1, 0, 0}};
  EXPECT_EQ(*constrained_auc(clips, 0.5), *constrained_auc(Scores{0.9, 0.3}, Scores{0.4, 0.1}, 0.5));
  EXPECT_EQ(*average_precision(clips, 0.5), *average_precision(Scores{0.9, 0.3}, Scores{0.4, 0.1}, 0.5));
}

// ---- oracle fuzzing

struct ClipSet {
  Scores pos;
  Scores neg;
  double lambda;
};

ClipSet random_set(Rng& rng) {
  ClipSet s;
  const std::size_t total = 2 + rng() % 5;  // 2..6 clips
  const std::size_t npos = 1 + rng() % (total - 1);
  // Coarse grid half the time so ties are common.
  const bool coarse = rng() % 2;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] { return coarse ? static_cast<double>(rng() % 4) / 4.0 : u(rng); };
  for (std::size_t k = 0; k < npos; ++k) s.pos.push_back(draw());
  for (std::size_t k = npos; k < total; ++k) s.neg.push_back(draw());
  const double lambdas[] = {0.1, 0.2, 0.25, 1.0 / 3.0, 0.5, 1.0};
  s.lambda = rng() % 4 == 0 ? 0.01 + 0.99 * u(rng) : lambdas[rng() % 6];
  return s;
}

TEST(MetricOracles, SmallSetsMatchEnumeration) {
  Rng rng(5);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto s = random_set(rng);
    ASSERT_NEAR(*constrained_auc(s.pos, s.neg, s.lambda), oracle::partial_auc(s.pos, s.neg, s.lambda), 1e-12);
    ASSERT_NEAR(*average_precision(s.pos, s.neg, s.lambda),
                oracle::average_precision(s.pos, s.neg, s.lambda), 1e-12);
    for (double theta : s.neg) ASSERT_EQ(far(s.neg, theta), oracle::far(s.neg, theta));
  }
}

TEST(MetricOracles, FullAucIsMannWhitney) {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pos = fixture::uniform_vector(rng, 1 + rng() % 60, 0, 1);
    auto neg = fixture::uniform_vector(rng, 1 + rng() % 60, 0, 1);
    if (trial % 3 == 0) {
      for (double& x : neg) x = std::round(x * 5) / 5;
    }
    ASSERT_NEAR(*constrained_auc(pos, neg, 1.0), oracle::mann_whitney(pos, neg), 1e-10);
  }
}

TEST(MetricOracles, PartialAreaMonotoneInLambda) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pos = fixture::uniform_vector(rng, 1 + rng() % 20, 0, 1);
    const auto neg = fixture::uniform_vector(rng, 1 + rng() % 20, 0, 1);
    double prev = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double area = partial_auc_area(pos, neg, k / 20.0);
      ASSERT_GE(area, prev - 1e-15);
      prev = area;
    }
  }
}

TEST(MetricOracles, InvariantUnderIncreasingTransform) {
  Rng rng(8);
  auto warp = [](double x) { return std::pow(x, 3) + 0.5 * x - 2.0; };
  for (int trial = 0; trial < 200; ++trial) {
    auto pos = fixture::uniform_vector(rng, 1 + rng() % 15, 0, 1);
    auto neg = fixture::uniform_vector(rng, 1 + rng() % 15, 0, 1);
    for (double& x : neg) x = std::round(x * 8) / 8;
    Scores wp;
    Scores wn;
    for (double x : pos) wp.push_back(warp(x));
    for (double x : neg) wn.push_back(warp(x));
    const double lambda = 0.05 + 0.95 * (rng() % 100) / 100.0;
    ASSERT_EQ(*constrained_auc(pos, neg, lambda), *constrained_auc(wp, wn, lambda));
    ASSERT_EQ(*average_precision(pos, neg, lambda), *average_precision(wp, wn, lambda));
    Scores thresholds = pos;
    thresholds.insert(thresholds.end(), neg.begin(), neg.end());
    Scores warped_thresholds = wp;
    warped_thresholds.insert(warped_thresholds.end(), wn.begin(), wn.end());
    const std::vector<AccidentTrace> none;
    std::vector<double> trace_a = pos;
    trace_a.push_back(0.0);
    std::vector<double> trace_b = wp;
    trace_b.push_back(warp(0.0));
    const std::vector<AccidentTrace> va = {{trace_a, 0, trace_a.size() - 1, 10.0}};
    const std::vector<AccidentTrace> vb = {{trace_b, 0, trace_b.size() - 1, 10.0}};
    const auto ma = mtta(va, neg, thresholds, lambda);
    const auto mb = mtta(vb, wn, warped_thresholds, lambda);
    ASSERT_EQ(ma.feasible_thresholds, mb.feasible_thresholds);
    ASSERT_EQ(ma.value, mb.value);
  }
}

// ---- mTTA

TEST(Mtta, StepAtOnset) {
  Scores a(30, 0.0);
  for (std::size_t t = 12; t < 30; ++t) a[t] = 1.0;
  const std::vector<AccidentTrace> v = {{a, 12, 29, 10.0}};
  const auto r = mtta(v, Scores{0.0, 0.5}, Scores{0.99}, 0.1);
  EXPECT_EQ(r.feasible_thresholds, 1u);
  EXPECT_DOUBLE_EQ(r.value, 1.7);
}

TEST(Mtta, AlarmsBeforeOnsetDoNotCount) {
  Scores a(20, 0.0);
  a[3] = 1.0;
  const std::vector<AccidentTrace> v = {{a, 10, 19, 10.0}};
  EXPECT_EQ(mtta(v, Scores{0.0}, Scores{0.9}, 0.1).value, 0.0);
}

TEST(Mtta, AllZeroScores) {
  const Scores a(20, 0.0);
  const std::vector<AccidentTrace> v = {{a, 5, 19, 10.0}};
  EXPECT_EQ(mtta(v, Scores{0.0}, Scores{0.5}, 0.1).value, 0.0);
}

TEST(Mtta, ThreeVideoToySet) {
  const Scores v1 = {0.1, 0.2, 0.8, 0.9};
  const Scores v2 = {0.3, 0.6, 0.6, 0.7};
  const Scores v3 = {0.2, 0.1, 0.2, 0.4};
  const std::vector<AccidentTrace> videos = {{v1, 1, 3, 10.0}, {v2, 0, 3, 10.0}, {v3, 2, 3, 10.0}};
  const Scores neg = {0.5, 0.65};
  // theta 0.6: alarms at frames 2, 1, none -> (0.1 + 0.2 + 0) / 3.
  // theta 0.8: alarms at frame 2, none, none -> 0.1 / 3.
  const auto both = mtta(videos, neg, Scores{0.6, 0.8}, 0.5);
  EXPECT_EQ(both.feasible_thresholds, 2u);
  EXPECT_NEAR(both.value, 1.0 / 15.0, 1e-15);
  const auto strict = mtta(videos, neg, Scores{0.6, 0.8}, 0.4);
  EXPECT_EQ(strict.feasible_thresholds, 1u);
  EXPECT_NEAR(strict.value, 1.0 / 30.0, 1e-15);
}

TEST(Mtta, NoFeasibleThresholdIsFlagged) {
  const Scores a = {0.1, 0.9};
  const std::vector<AccidentTrace> v = {{a, 0, 1, 10.0}};
  const auto r = mtta(v, Scores{0.95, 0.99}, Scores{0.1, 0.9}, 0.1);
  EXPECT_TRUE(r.flagged);
  EXPECT_EQ(r.value, 0.0);
}

TEST(Mtta, MatchesEnumerationAndIsBounded) {
  Rng rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t nv = 1 + rng() % 3;
    std::vector<oracle::Trace> traces;
    std::vector<AccidentTrace> views;
    double bound = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
      oracle::Trace t;
      const std::size_t n = 2 + rng() % 8;
      t.scores = Scores(n);
      for (double& x : t.scores) x = static_cast<double>(rng() % 6) / 5.0;
      t.collision = n - 1;
      t.onset = rng() % n;
      bound = std::max(bound, static_cast<double>(t.collision - t.onset) / t.fps);
      traces.push_back(t);
    }
    for (const auto& t : traces) views.push_back({t.scores, t.onset, t.collision, t.fps});
    Scores neg(1 + rng() % 4);
    for (double& x : neg) x = static_cast<double>(rng() % 6) / 5.0;
    Scores thresholds = neg;
    for (const auto& t : traces) thresholds.insert(thresholds.end(), t.scores.begin(), t.scores.end());
    const double lambda = (1 + rng() % 10) / 10.0;
    const auto got = mtta(views, neg, thresholds, lambda);
    const auto want = oracle::mtta(traces, neg, thresholds, lambda);
    ASSERT_EQ(got.feasible_thresholds, want.feasible);
    ASSERT_NEAR(got.value, want.value, 1e-12);
    ASSERT_GE(got.value, 0.0);
    ASSERT_LE(got.value, bound + 1e-12);
  }
}

// ---- aggregation and files

std::vector<BucketMetrics> buckets_with(double a, double b, double c) {
  std::vector<BucketMetrics> out(4);
  const double v[] = {0.99, a, b, c};
  for (std::size_t k = 0; k < 4; ++k) {
    out[k].tau = kBucketStarts[k];
    out[k].auc_l = out[k].auc = out[k].ap = v[k];
  }
  return out;
}

TEST(Aggregate, MeansOverLaterBuckets) {
  const auto r = aggregate(buckets_with(0.4, 0.5, 0.6), {}, 0.1);
  EXPECT_DOUBLE_EQ(*r.mauc_l, 0.5);
  EXPECT_DOUBLE_EQ(*r.map, 0.5);
  const auto same = aggregate(buckets_with(0.37, 0.37, 0.37), {}, 0.1);
  EXPECT_DOUBLE_EQ(*same.mauc, 0.37);
}

TEST(Aggregate, MissingBucketIsUndefined) {
  auto b = buckets_with(0.4, 0.5, 0.6);
  b[2].auc_l.reset();
  const auto r = aggregate(b, {}, 0.1);
  EXPECT_FALSE(r.mauc_l);
  EXPECT_TRUE(r.mauc);
  b.erase(b.begin() + 3);
  EXPECT_FALSE(aggregate(b, {}, 0.1).mauc);
}

TEST(Report, JsonShape) {
  const auto r = aggregate(buckets_with(0.4, 0.5, 0.6), {1.25, 3, false}, 0.1);
  const auto json = r.to_json();
  for (const char* key : {"\"mauc_l\"", "\"mauc\"", "\"map\"", "\"mtta_l\"", "\"per_bucket\"",
                          "\"lambda\"", "\"0.0\"", "\"0.5\"", "\"1.0\"", "\"1.5\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
  EXPECT_LT(json.find("\"mauc_l\""), json.find("\"per_bucket\""));
}

TEST(ClipCsv, RoundTripIsExact) {
  Rng rng(10);
  const auto c = corpus(rng, 6, 6, 30);
  const auto clips = extract_clips(c.curves, c.seqs, 1).clips;
  const auto csv = clips_to_csv(clips);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "video_id,bucket,score,label,decision_frame");
  EXPECT_EQ(clips_from_csv(csv), clips);
  EXPECT_THROW(clips_from_csv("a,b\n"), ParseError);
  EXPECT_THROW(clips_from_csv("video_id,bucket,score,label,decision_frame\n1,0.7,0.5,1,3\n"), ParseError);
}

TEST(ClipCsv, ReportRecomputesFromSavedClips) {
  Rng rng(11);
  const auto c = corpus(rng, 20, 15, 40);
  const auto clips = clips_from_csv(clips_to_csv(extract_clips(c.curves, c.seqs, 2).clips));
  const auto report = aggregate(bucket_metrics(clips, 0.1), {}, 0.1);

  // One-pass reference: split by bucket, score with the oracles, average.
  std::array<Scores, 4> pos;
  Scores neg;
  for (const auto& clip : clips) (clip.label ? pos[*clip.bucket] : neg).push_back(clip.score);
  double auc_l = 0.0;
  double auc = 0.0;
  double ap = 0.0;
  for (std::size_t b = 1; b < 4; ++b) {
    auc_l += oracle::partial_auc(pos[b], neg, 0.1) / 3.0;
    auc += oracle::partial_auc(pos[b], neg, 1.0) / 3.0;
    ap += oracle::average_precision(pos[b], neg, 0.1) / 3.0;
  }
  EXPECT_NEAR(*report.mauc_l, auc_l, 1e-12);
  EXPECT_NEAR(*report.mauc, auc, 1e-12);
  EXPECT_NEAR(*report.map, ap, 1e-12);
  for (const auto& b : report.buckets) {
    EXPECT_EQ(b.positives, 20u);
    EXPECT_EQ(b.negatives, 80u);
  }
}

}  // namespace
}  // namespace riskprop
