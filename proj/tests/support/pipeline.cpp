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

#include "pipeline.hpp"

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace riskprop::oracle {

std::vector<const FrameSequence*> PipelineCase::batch() const {
  std::vector<const FrameSequence*> out;
  for (const auto& s : seqs) out.push_back(&s);
  return out;
}

PipelineCase pipeline_case(Rng& rng, ScorerKind kind, std::size_t members) {
  TrainConfig cfg;
  cfg.window = 1 + rng() % 4;
  cfg.scorer = kind;
  cfg.hidden = 5;
  cfg.margin.delta0 = 0.3;  // large enough that the margin term is visible
  const LabelingStrategy strategies[] = {LabelingStrategy::only_collision(),
                                         LabelingStrategy::fixed_interval(0.5),
                                         LabelingStrategy::anomaly_onset()};
  cfg.labeling = strategies[rng() % 3];
  std::vector<FrameSequence> seqs;
  for (std::size_t v = 0; v < members; ++v) {
    seqs.push_back(fixture::random_sequence(rng, 10 + rng() % 20, 3, v == 0 || rng() % 2));
  }
  auto scorer = Scorer::initialized(cfg.scorer_shape(3), rng());
  for (double& p : scorer.params()) p *= 10.0;
  PipelineCase c{std::move(seqs), cfg, std::move(scorer), {}};
  Rng pair_rng(rng());
  c.plan = plan_batch(c.batch(), cfg, pair_rng);
  return c;
}

bool clear_of_kinks(const PipelineCase& c, double abar) {
  for (std::size_t v = 0; v < c.seqs.size(); ++v) {
    if (!c.seqs[v].is_accident) continue;
    const auto a = score_sequence(c.scorer, c.seqs[v], c.cfg.window).scores;
    for (double x : a) {
      if (std::abs(x - abar) < 1e-4) return false;
    }
    const double n = static_cast<double>(a.size());
    for (const auto& [i, j] : c.plan.pairs[v]) {
      const double dt = static_cast<double>(j - i) / n;
      const double m = c.cfg.margin.delta0 * dt * (std::abs(a[i] - abar) + std::abs(a[j] - abar));
      if (std::abs(a[i] - a[j] + m) < 1e-4) return false;
    }
  }
  return true;
}

double pinned_objective(const PipelineCase& c, std::span<const double> params, double abar) {
  Scorer probe(c.scorer.shape());
  std::copy(params.begin(), params.end(), probe.params().begin());
  auto cfg = c.cfg;
  cfg.ffr_enabled = false;
  auto plan = c.plan;
  plan.frozen_abar = abar;
  double total = evaluate_batch(probe, c.batch(), plan, cfg).total;
  if (!c.cfg.ffr_enabled) return total;
  const double scale = 1.0 / static_cast<double>(c.seqs.size());
  for (const auto& seq : c.seqs) {
    if (!seq.is_accident) continue;
    const auto target = score_sequence(c.scorer, seq, cfg.window).logits;
    const auto z = score_sequence(probe, seq, cfg.window).logits;
    for (std::size_t t = 0; t + 1 < z.size(); ++t) {
      total += scale * c.cfg.margin.lambda1 * std::pow(target[t + 1] - z[t], 2);
    }
  }
  return total;
}

PipelineCheck check_pipeline(const PipelineCase& c, double rel) {
  PipelineCheck out;
  const auto result = evaluate_batch(c.scorer, c.batch(), c.plan, c.cfg);
  if (!result.abar || !clear_of_kinks(c, *result.abar)) {
    out.screened_out = true;
    return out;
  }
  const std::vector<double> p0(c.scorer.params().begin(), c.scorer.params().end());
  const auto numeric = central_diff(
      [&](std::span<const double> p) { return pinned_objective(c, p, *result.abar); }, p0);
  out.check = compare_grads(result.grads, numeric, rel);
  return out;
}

}  // namespace riskprop::oracle
