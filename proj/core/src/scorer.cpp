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

#include "riskprop/scorer.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"
#include "riskprop/error.hpp"

namespace riskprop {

std::size_t ScorerShape::param_count() const noexcept {
  const std::size_t in = input_size();
  if (kind == ScorerKind::Linear) return in + 1;
  return hidden * in + hidden + hidden + 1;
}

Scorer::Scorer(ScorerShape shape) : shape_(shape) {
  if (shape_.window == 0 || shape_.feature_dim == 0) {
    throw ConfigError("scorer window and feature_dim must be >= 1");
  }
  if (shape_.kind == ScorerKind::Mlp && shape_.hidden == 0) {
    throw ConfigError("mlp scorer needs hidden >= 1");
  }
  if (shape_.kind == ScorerKind::Linear) shape_.hidden = 0;
  params_.assign(shape_.param_count(), 0.0);
  grads_.assign(params_.size(), 0.0);
}

Scorer Scorer::initialized(ScorerShape shape, std::uint64_t seed) {
  Scorer s(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.1, 0.1);
  for (double& p : s.params_) p = init(rng);
  return s;
}

double Scorer::forward(std::span<const double> input, Tape& tape) const {
  const std::size_t in = shape_.input_size();
  if (input.size() != in) {
    throw ConfigError("scorer expects " + std::to_string(in) + " inputs, got " +
                      std::to_string(input.size()));
  }
  tape.input.assign(input.begin(), input.end());
  if (shape_.kind == ScorerKind::Linear) {
    tape.hidden.clear();
    double z = params_[in];
    for (std::size_t k = 0; k < in; ++k) z += params_[k] * input[k];
    return z;
  }
  const std::size_t h = shape_.hidden;
  const double* w1 = params_.data();
  const double* b1 = w1 + h * in;
  const double* w2 = b1 + h;
  const double b2 = w2[h];
  tape.hidden.resize(h);
  double z = b2;
  for (std::size_t u = 0; u < h; ++u) {
    double pre = b1[u];
    const double* row = w1 + u * in;
    for (std::size_t k = 0; k < in; ++k) pre += row[k] * input[k];
    tape.hidden[u] = std::tanh(pre);
    z += w2[u] * tape.hidden[u];
  }
  return z;
}

double Scorer::forward(const Snippet& snippet, Tape& tape) const {
  if (snippet.window() != shape_.window || snippet.feature_dim() != shape_.feature_dim) {
    throw ConfigError("snippet shape does not match scorer input");
  }
  std::vector<double> input(shape_.input_size());
  snippet.flatten_into(input);
  return forward(input, tape);
}

void Scorer::check_tape(const Tape& tape) const {
  const bool ok = tape.input.size() == shape_.input_size() &&
                  tape.hidden.size() == (shape_.kind == ScorerKind::Mlp ? shape_.hidden : 0);
  if (!ok) throw std::logic_error("tape was not produced by this scorer");
}

void Scorer::backward(const Tape& tape, double grad_logit) {
  backward(tape, grad_logit, grads_);
}

void Scorer::backward(const Tape& tape, double grad_logit, std::span<double> grads) const {
  check_tape(tape);
  if (grads.size() != params_.size()) throw std::logic_error("gradient buffer size mismatch");
  if (grad_logit == 0.0) return;
  const std::size_t in = shape_.input_size();
  const auto& x = tape.input;
  if (shape_.kind == ScorerKind::Linear) {
    for (std::size_t k = 0; k < in; ++k) grads[k] += grad_logit * x[k];
    grads[in] += grad_logit;
    return;
  }
  const std::size_t h = shape_.hidden;
  const double* w2 = params_.data() + h * in + h;
  double* g_w1 = grads.data();
  double* g_b1 = g_w1 + h * in;
  double* g_w2 = g_b1 + h;
  for (std::size_t u = 0; u < h; ++u) {
    const double act = tape.hidden[u];
    g_w2[u] += grad_logit * act;
    const double g_pre = grad_logit * w2[u] * (1.0 - act * act);
    g_b1[u] += g_pre;
    double* row = g_w1 + u * in;
    for (std::size_t k = 0; k < in; ++k) row[k] += g_pre * x[k];
  }
  g_w2[h] += grad_logit;
}

void Scorer::zero_grad() noexcept { std::fill(grads_.begin(), grads_.end(), 0.0); }

void Scorer::sgd_step(double lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  for (std::size_t k = 0; k < params_.size(); ++k) params_[k] -= lr * grads_[k];
}

std::string Scorer::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = shape_.kind == ScorerKind::Linear ? "linear" : "mlp";
  j["hidden"] = shape_.hidden;
  j["params"] = params_;
  j["window"] = shape_.window;
  j["feature_dim"] = shape_.feature_dim;
  return j.dump();
}

Scorer Scorer::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    ScorerShape shape;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      shape.kind = ScorerKind::Linear;
    } else if (kind == "mlp") {
      shape.kind = ScorerKind::Mlp;
    } else {
      throw ParseError("unknown scorer kind '" + kind + "'");
    }
    shape.hidden = j.value("hidden", std::size_t{0});
    shape.window = j.at("window").get<std::size_t>();
    shape.feature_dim = j.at("feature_dim").get<std::size_t>();
    Scorer s(shape);
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != s.params_.size()) {
      throw ParseError("checkpoint has " + std::to_string(params.size()) +
                       " params, shape needs " + std::to_string(s.params_.size()));
    }
    s.params_ = std::move(params);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint: ") + e.what());
  }
}

void Scorer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json() << '\n';
}

Scorer Scorer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace riskprop
