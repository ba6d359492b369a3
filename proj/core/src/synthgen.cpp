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

#include "riskprop/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "json.hpp"
#include "riskprop/error.hpp"
#include "riskprop/random.hpp"

namespace riskprop {
namespace {

constexpr double kDistractorWidthFrames = 4.0;
constexpr std::uint64_t kSplitStream = 0x5eed5eedULL;

using Json = nlohmann::ordered_json;

}  // namespace

void GenConfig::validate() const {
  if (num_accident + num_safe < 1) throw ConfigError("need at least one video");
  if (frames_per_video < 2) throw ConfigError("frames_per_video must be >= 2");
  if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (signal_dims < 1) throw ConfigError("signal_dims must be >= 1");
  if (signal_dims > feature_dim) {
    throw ConfigError("signal_dims (" + std::to_string(signal_dims) + ") exceeds feature_dim (" +
                      std::to_string(feature_dim) + ")");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(onset_lo > 0.0 && onset_lo <= onset_hi && onset_hi < 1.0)) {
    throw ConfigError("onset fraction range must satisfy 0 < lo <= hi < 1");
  }
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  if (!(ramp_steepness > 0.0)) throw ConfigError("ramp_steepness must be positive");
  if (!(distractor_fraction >= 0.0 && distractor_fraction <= 1.0)) {
    throw ConfigError("distractor_fraction must lie in [0, 1]");
  }
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1]");
  }
}

double hazard_ramp(std::size_t t, std::size_t onset, std::size_t collision, RampShape shape,
                   double steepness) {
  if (t >= collision) return 1.0;
  if (t < onset) return 0.0;
  const double p = static_cast<double>(t - onset) / static_cast<double>(collision - onset);
  if (shape == RampShape::Linear) return p;
  // Logistic rescaled so the ramp starts at exactly 0 and ends at exactly 1.
  const double k = steepness;
  const double lo = sigmoid(-0.5 * k);
  const double hi = sigmoid(0.5 * k);
  return std::clamp((sigmoid(k * (p - 0.5)) - lo) / (hi - lo), 0.0, 1.0);
}

std::vector<FrameSequence> generate(const GenConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.frames_per_video;
  const std::size_t d = cfg.feature_dim;
  const std::size_t total = cfg.num_accident + cfg.num_safe;
  std::vector<FrameSequence> out;
  out.reserve(total);

  for (std::size_t v = 0; v < total; ++v) {
    Rng rng(mix_seed(cfg.seed, v));
    std::normal_distribution<double> noise(0.0, 1.0);
    FrameSequence seq;
    seq.fps = cfg.fps;
    seq.is_accident = v < cfg.num_accident;
    std::vector<double> hazard(n, 0.0);

    if (seq.is_accident) {
      const std::size_t collision = n - 1;
      const auto lo = static_cast<std::size_t>(std::llround(cfg.onset_lo * static_cast<double>(n)));
      const auto hi = static_cast<std::size_t>(std::llround(cfg.onset_hi * static_cast<double>(n)));
      std::uniform_int_distribution<std::size_t> onset_dist(std::min(lo, collision),
                                                            std::min(hi, collision));
      const std::size_t onset = onset_dist(rng);
      for (std::size_t t = 0; t < n; ++t) hazard[t] = hazard_ramp(t, onset, collision, cfg.ramp_shape, cfg.ramp_steepness);
      seq.collision_index = collision;
      seq.onset_index = onset;
    }

    seq.features = FeatureMatrix(n, d);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t k = 0; k < d; ++k) {
        const double signal = k < cfg.signal_dims ? hazard[t] : 0.0;
        seq.features(t, k) = signal + cfg.noise_sigma * noise(rng);
      }
    }

    if (!seq.is_accident && cfg.signal_dims < d) {
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      if (coin(rng) < cfg.distractor_fraction) {
        std::uniform_int_distribution<std::size_t> dim(cfg.signal_dims, d - 1);
        std::uniform_int_distribution<std::size_t> center(0, n - 1);
        const std::size_t k = dim(rng);
        const double c = static_cast<double>(center(rng));
        for (std::size_t t = 0; t < n; ++t) {
          const double u = (static_cast<double>(t) - c) / kDistractorWidthFrames;
          seq.features(t, k) += cfg.distractor_amplitude * std::exp(-0.5 * u * u);
        }
      }
    }

    seq.latent_hazard = std::move(hazard);
    out.push_back(std::move(seq));
  }
  return out;
}

DatasetSplit split_dataset(std::vector<FrameSequence> seqs, double train_fraction,
                           std::uint64_t seed) {
  std::vector<std::size_t> accident;
  std::vector<std::size_t> safe;
  for (std::size_t i = 0; i < seqs.size(); ++i) (seqs[i].is_accident ? accident : safe).push_back(i);
  Rng rng(mix_seed(seed, kSplitStream));
  std::shuffle(accident.begin(), accident.end(), rng);
  std::shuffle(safe.begin(), safe.end(), rng);

  DatasetSplit split;
  for (const auto* group : {&accident, &safe}) {
    const auto cut = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(group->size())));
    for (std::size_t k = 0; k < group->size(); ++k) {
      auto& dst = k < cut ? split.train : split.test;
      dst.push_back(std::move(seqs[(*group)[k]]));
    }
  }
  return split;
}

std::string to_json_line(const FrameSequence& seq) {
  Json j;
  Json rows = Json::array();
  for (std::size_t t = 0; t < seq.num_frames(); ++t) {
    const auto r = seq.features.row(t);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["features"] = std::move(rows);
  j["fps"] = seq.fps;
  j["is_accident"] = seq.is_accident;
  if (seq.collision_index) j["collision_index"] = *seq.collision_index;
  if (seq.onset_index) j["onset_index"] = *seq.onset_index;
  if (seq.latent_hazard) j["latent_hazard"] = *seq.latent_hazard;
  return j.dump();
}

FrameSequence from_json_line(const std::string& line, std::size_t line_number) {
  try {
    const auto j = nlohmann::json::parse(line);
    const auto& rows = j.at("features");
    if (!rows.is_array() || rows.empty()) throw ParseError("features must be a non-empty array", line_number);
    const std::size_t n = rows.size();
    const std::size_t d = rows.at(0).size();
    std::vector<double> data;
    data.reserve(n * d);
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != d) throw ParseError("ragged features matrix", line_number);
      for (const auto& x : row) data.push_back(x.get<double>());
    }
    FrameSequence seq;
    seq.features = FeatureMatrix(n, d, std::move(data));
    seq.fps = j.value("fps", 10.0);
    seq.is_accident = j.at("is_accident").get<bool>();
    auto optional_index = [&](const char* key) -> std::optional<std::size_t> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<std::size_t>();
    };
    seq.collision_index = optional_index("collision_index");
    seq.onset_index = optional_index("onset_index");
    if (j.contains("latent_hazard") && !j["latent_hazard"].is_null()) {
      seq.latent_hazard = j["latent_hazard"].get<std::vector<double>>();
    }
    seq.validate();
    return seq;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what(), line_number);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), line_number);
  }
}

void write_dataset(const std::vector<FrameSequence>& seqs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& seq : seqs) out << to_json_line(seq) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<FrameSequence> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<FrameSequence> seqs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    seqs.push_back(from_json_line(line, line_number));
  }
  return seqs;
}

std::string to_json(const GenConfig& cfg) {
  Json j;
  j["num_accident"] = cfg.num_accident;
  j["num_safe"] = cfg.num_safe;
  j["frames_per_video"] = cfg.frames_per_video;
  j["feature_dim"] = cfg.feature_dim;
  j["signal_dims"] = cfg.signal_dims;
  j["noise_sigma"] = cfg.noise_sigma;
  j["onset_fraction_range"] = {cfg.onset_lo, cfg.onset_hi};
  j["ramp_shape"] = ramp_shape_name(cfg.ramp_shape);
  j["ramp_steepness"] = cfg.ramp_steepness;
  j["fps"] = cfg.fps;
  j["distractor_fraction"] = cfg.distractor_fraction;
  j["distractor_amplitude"] = cfg.distractor_amplitude;
  j["train_fraction"] = cfg.train_fraction;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

GenConfig gen_config_from_json(const std::string& text, GenConfig base) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ParseError("generator config must be a JSON object");
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::remove_reference_t<decltype(field)>>();
    };
    get("num_accident", base.num_accident);
    get("num_safe", base.num_safe);
    get("frames_per_video", base.frames_per_video);
    get("feature_dim", base.feature_dim);
    get("signal_dims", base.signal_dims);
    get("noise_sigma", base.noise_sigma);
    if (j.contains("onset_fraction_range")) {
      const auto range = j["onset_fraction_range"].get<std::vector<double>>();
      if (range.size() != 2) throw ParseError("onset_fraction_range needs two values");
      base.onset_lo = range[0];
      base.onset_hi = range[1];
    }
    if (j.contains("ramp_shape")) base.ramp_shape = parse_ramp_shape(j["ramp_shape"].get<std::string>());
    get("ramp_steepness", base.ramp_steepness);
    get("fps", base.fps);
    get("distractor_fraction", base.distractor_fraction);
    get("distractor_amplitude", base.distractor_amplitude);
    get("train_fraction", base.train_fraction);
    get("seed", base.seed);
    return base;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad generator config: ") + e.what());
  }
}

std::string ramp_shape_name(RampShape shape) {
  return shape == RampShape::Linear ? "linear" : "sigmoid";
}

RampShape parse_ramp_shape(const std::string& name) {
  if (name == "linear") return RampShape::Linear;
  if (name == "sigmoid") return RampShape::Sigmoid;
  throw ConfigError("unknown ramp shape '" + name + "'");
}

}  // namespace riskprop
