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

#include <fstream>

#include "fixtures.hpp"
#include "riskprop/error.hpp"
#include "riskprop/hash.hpp"
#include "riskprop/synthgen.hpp"

namespace riskprop {
namespace {

GenConfig small(std::uint64_t seed) {
  GenConfig cfg;
  cfg.num_accident = 12;
  cfg.num_safe = 10;
  cfg.frames_per_video = 60;
  cfg.seed = seed;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(HazardRamp, LinearClosedForm) {
  EXPECT_EQ(hazard_ramp(59, 60, 119, RampShape::Linear), 0.0);
  EXPECT_EQ(hazard_ramp(60, 60, 119, RampShape::Linear), 0.0);
  EXPECT_EQ(hazard_ramp(119, 60, 119, RampShape::Linear), 1.0);
  EXPECT_DOUBLE_EQ(hazard_ramp(89, 60, 119, RampShape::Linear), 29.0 / 59.0);
  EXPECT_NEAR(hazard_ramp(89, 60, 119, RampShape::Linear), 0.5, 0.01);
}

TEST(HazardRamp, SigmoidEndpointsAndShape) {
  for (double k : {2.0, 10.0, 25.0}) {
    EXPECT_EQ(hazard_ramp(30, 30, 100, RampShape::Sigmoid, k), 0.0);
    EXPECT_EQ(hazard_ramp(100, 30, 100, RampShape::Sigmoid, k), 1.0);
    EXPECT_NEAR(hazard_ramp(65, 30, 100, RampShape::Sigmoid, k), 0.5, 1e-12);
    double prev = 0.0;
    for (std::size_t t = 0; t <= 100; ++t) {
      const double h = hazard_ramp(t, 30, 100, RampShape::Sigmoid, k);
      ASSERT_GE(h, prev);
      prev = h;
    }
  }
}

TEST(Generate, AccidentInvariants) {
  for (auto shape : {RampShape::Linear, RampShape::Sigmoid}) {
    auto cfg = small(3);
    cfg.ramp_shape = shape;
    const auto seqs = generate(cfg);
    ASSERT_EQ(seqs.size(), 22u);
    std::size_t accidents = 0;
    for (const auto& s : seqs) {
      s.validate();
      ASSERT_EQ(s.num_frames(), 60u);
      ASSERT_EQ(s.feature_dim(), 8u);
      ASSERT_TRUE(s.latent_hazard);
      const auto& h = *s.latent_hazard;
      if (!s.is_accident) {
        EXPECT_FALSE(s.collision_index);
        for (double v : h) ASSERT_EQ(v, 0.0);
        continue;
      }
      ++accidents;
      ASSERT_EQ(*s.collision_index, 59u);
      const std::size_t o = *s.onset_index;
      EXPECT_GE(o, 18u);
      EXPECT_LE(o, 48u);
      EXPECT_EQ(h.back(), 1.0);
      for (std::size_t t = 0; t < o; ++t) ASSERT_EQ(h[t], 0.0);
      for (std::size_t t = 0; t + 1 < h.size(); ++t) ASSERT_GE(h[t + 1], h[t]);
    }
    EXPECT_EQ(accidents, 12u);
  }
}

TEST(Generate, NoiselessFeaturesAreBroadcastHazard) {
  auto cfg = small(4);
  cfg.noise_sigma = 0.0;
  cfg.signal_dims = cfg.feature_dim;
  for (const auto& s : generate(cfg)) {
    for (std::size_t t = 0; t < s.num_frames(); ++t) {
      for (std::size_t c = 0; c < s.feature_dim(); ++c) {
        ASSERT_EQ(s.features(t, c), (*s.latent_hazard)[t]);
      }
    }
  }
}

TEST(Generate, DistractorsOnlyTouchNoiseDims) {
  auto cfg = small(5);
  cfg.noise_sigma = 0.0;
  cfg.distractor_fraction = 1.0;
  cfg.num_accident = 0;
  for (const auto& s : generate(cfg)) {
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t t = 0; t < s.num_frames(); ++t) {
      for (std::size_t c = 0; c < s.feature_dim(); ++c) {
        (c < cfg.signal_dims ? signal : noise) += std::abs(s.features(t, c));
      }
    }
    EXPECT_EQ(signal, 0.0);
    EXPECT_GT(noise, 0.0);
  }
}

TEST(Generate, RejectsImpossibleConfigs) {
  auto cfg = small(1);
  cfg.signal_dims = 9;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = small(1);
  cfg.num_accident = cfg.num_safe = 0;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = small(1);
  cfg.signal_dims = 0;
  EXPECT_THROW(generate(cfg), ConfigError);
}

TEST(Generate, SameSeedSameBytes) {
  fixture::TempDir dir("gen");
  write_dataset(generate(small(8)), dir / "a.jsonl");
  write_dataset(generate(small(8)), dir / "b.jsonl");
  write_dataset(generate(small(9)), dir / "c.jsonl");
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_NE(slurp(dir / "a.jsonl"), slurp(dir / "c.jsonl"));
}

TEST(Split, StratifiedAndDisjoint) {
  auto cfg = small(10);
  cfg.num_accident = 50;
  cfg.num_safe = 30;
  const auto all = generate(cfg);
  const auto split = split_dataset(all, 0.8, 10);
  ASSERT_EQ(split.train.size() + split.test.size(), all.size());
  auto count = [](const std::vector<FrameSequence>& v) {
    return std::count_if(v.begin(), v.end(), [](const FrameSequence& s) { return s.is_accident; });
  };
  EXPECT_EQ(count(split.train), 40);
  EXPECT_EQ(count(split.test), 10);
  EXPECT_EQ(split.train.size(), 64u);
  // Every sequence lands in exactly one side.
  std::multiset<std::string> seen;
  for (const auto& s : split.train) seen.insert(to_json_line(s));
  for (const auto& s : split.test) seen.insert(to_json_line(s));
  std::multiset<std::string> expected;
  for (const auto& s : all) expected.insert(to_json_line(s));
  EXPECT_EQ(seen, expected);
}

TEST(DatasetIo, EmptyRoundTrip) {
  fixture::TempDir dir("io");
  write_dataset({}, dir / "e.jsonl");
  EXPECT_EQ(slurp(dir / "e.jsonl"), "");
  EXPECT_TRUE(read_dataset(dir / "e.jsonl").empty());
}

TEST(DatasetIo, SafeVideoRoundTrip) {
  fixture::TempDir dir("io");
  Rng rng(12);
  const auto seq = fixture::random_sequence(rng, 7, 3, false);
  write_dataset({seq}, dir / "s.jsonl");
  const auto back = read_dataset(dir / "s.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], seq);
}

TEST(DatasetIo, FieldNamesAreExact) {
  Rng rng(13);
  const std::string line = to_json_line(fixture::random_sequence(rng, 3, 2, true));
  for (const char* key : {"\"features\"", "\"fps\"", "\"is_accident\"", "\"collision_index\"",
                          "\"onset_index\"", "\"latent_hazard\""}) {
    EXPECT_NE(line.find(key), std::string::npos) << key;
  }
  EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(DatasetIo, ThousandVideoRoundTripPreservesHashes) {
  fixture::TempDir dir("io");
  GenConfig cfg;
  cfg.num_accident = 500;
  cfg.num_safe = 500;
  cfg.frames_per_video = 20;
  cfg.seed = 14;
  const auto seqs = generate(cfg);
  write_dataset(seqs, dir / "big.jsonl");
  const auto back = read_dataset(dir / "big.jsonl");
  ASSERT_EQ(back.size(), 1000u);
  for (std::size_t v = 0; v < seqs.size(); ++v) {
    ASSERT_EQ(hash_bytes(to_json_line(back[v])), hash_bytes(to_json_line(seqs[v]))) << v;
    ASSERT_EQ(back[v], seqs[v]);
  }
}

TEST(DatasetIo, MalformedLineReportsLineNumber) {
  fixture::TempDir dir("io");
  Rng rng(15);
  const auto seq = fixture::random_sequence(rng, 4, 2, false);
  {
    std::ofstream out(dir / "bad.jsonl");
    out << to_json_line(seq) << "\n" << to_json_line(seq) << "\n{\"features\": [[1, 2], [3]]}\n";
  }
  try {
    read_dataset(dir / "bad.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(GenConfigJson, RoundTrip) {
  auto cfg = small(77);
  cfg.ramp_shape = RampShape::Linear;
  cfg.onset_lo = 0.25;
  cfg.distractor_fraction = 0.0;
  const auto back = gen_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.ramp_shape, RampShape::Linear);
  EXPECT_THROW(gen_config_from_json("[1, 2]"), ParseError);
  EXPECT_THROW(parse_ramp_shape("cubic"), std::exception);
}

}  // namespace
}  // namespace riskprop
