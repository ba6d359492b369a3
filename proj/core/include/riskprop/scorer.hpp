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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "riskprop/domain.hpp"

namespace riskprop {

enum class ScorerKind { Linear, Mlp };

struct ScorerShape {
  ScorerKind kind = ScorerKind::Linear;
  std::size_t window = 5;        // observed frames O
  std::size_t feature_dim = 8;
  std::size_t hidden = 0;        // Mlp only

  std::size_t input_size() const noexcept { return window * feature_dim; }
  std::size_t param_count() const noexcept;

  bool operator==(const ScorerShape&) const = default;
};

// Activations recorded by forward() and consumed by backward().
struct Tape {
  std::vector<double> input;   // flattened snippet
  std::vector<double> hidden;  // tanh activations (Mlp)
};

// Per-snippet risk scorer z = f(x) with hand-derived gradients.
//
// Linear:  z = <w, x> + b.             params = [w (I), b]
// Mlp:     h = tanh(W1 x + b1)
//          z = <w2, h> + b2.           params = [W1 (H x I, row-major), b1 (H), w2 (H), b2]
class Scorer {
 public:
  explicit Scorer(ScorerShape shape);

  // Parameters uniform in [-0.1, 0.1] from a seeded generator.
  static Scorer initialized(ScorerShape shape, std::uint64_t seed);

  const ScorerShape& shape() const noexcept { return shape_; }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> grads() const noexcept { return grads_; }
  std::span<double> grads() noexcept { return grads_; }

  double forward(std::span<const double> input, Tape& tape) const;
  double forward(const Snippet& snippet, Tape& tape) const;

  // Accumulates grad_logit * dz/dparams. The overload taking a buffer leaves
  // the scorer untouched so independent workers can accumulate in parallel.
  void backward(const Tape& tape, double grad_logit);
  void backward(const Tape& tape, double grad_logit, std::span<double> grads) const;

  void zero_grad() noexcept;
  void sgd_step(double lr);

  // {"kind": "linear"|"mlp", "hidden": H, "params": [...], "window": O, "feature_dim": D}
  std::string to_json() const;
  static Scorer from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Scorer load(const std::filesystem::path& path);

 private:
  void check_tape(const Tape& tape) const;

  ScorerShape shape_;
  std::vector<double> params_;
  std::vector<double> grads_;
};

}  // namespace riskprop
