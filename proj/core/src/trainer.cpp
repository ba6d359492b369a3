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

#include "riskprop/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "riskprop/error.hpp"
#include "riskprop/random.hpp"
#include "riskprop/parallel.hpp"
#include "riskprop/synthgen.hpp"

namespace riskprop {
namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kPairStream = 2;

std::string format_double(double x) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.10g", x);
  return buf.data();
}

[[noreturn]] void abort_non_finite(std::span<const FrameSequence* const> batch,
                                   const BatchResult& result, const TrainConfig& cfg,
                                   std::size_t epoch, std::size_t batch_index) {
  std::ostringstream msg;
  msg << "non-finite loss at epoch " << epoch << " batch " << batch_index
      << ": l_bce=" << result.l_bce << " l_reg=" << result.l_reg << " l_mono=" << result.l_mono
      << " total=" << result.total << " abar=" << (result.abar ? *result.abar : -1.0)
      << " members=" << batch.size();
  if (!cfg.nan_dump_path.empty()) {
    std::ofstream out(cfg.nan_dump_path, std::ios::binary);
    for (const auto* seq : batch) out << to_json_line(*seq) << '\n';
    msg << " (batch written to " << cfg.nan_dump_path << ")";
  }
  throw TrainingError(msg.str());
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
  if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be positive");
  if (lr_step_epochs == 0) throw ConfigError("lr_step_epochs must be >= 1");
  if (window == 0) throw ConfigError("window must be >= 1");
  if (scorer == ScorerKind::Mlp && hidden == 0) throw ConfigError("mlp needs hidden >= 1");
  if (margin.delta0 < 0.0 || margin.lambda1 < 0.0 || margin.lambda2 < 0.0) {
    throw ConfigError("delta0, lambda1 and lambda2 must be >= 0");
  }
  if (w_pos < 0.0 || w_neg < 0.0) throw ConfigError("anchor weights must be >= 0");
  if (labeling.kind == LabelingStrategy::Kind::FixedInterval && !(labeling.seconds > 0.0)) {
    throw ConfigError("fixed interval length must be positive");
  }
  sampler.validate();
}

ScorerShape TrainConfig::scorer_shape(std::size_t feature_dim) const {
  return {scorer, window, feature_dim, scorer == ScorerKind::Mlp ? hidden : 0};
}

std::string labeling_name(const LabelingStrategy& strategy) {
  switch (strategy.kind) {
    case LabelingStrategy::Kind::OnlyCollision: return "collision";
    case LabelingStrategy::Kind::FixedInterval: return "interval";
    case LabelingStrategy::Kind::AnomalyOnset: return "onset";
  }
  return "collision";
}

LabelingStrategy parse_labeling(const std::string& name, double interval_seconds) {
  if (name == "collision") return LabelingStrategy::only_collision();
  if (name == "interval") return LabelingStrategy::fixed_interval(interval_seconds);
  if (name == "onset") return LabelingStrategy::anomaly_onset();
  throw ConfigError("unknown labeling '" + name + "' (expected collision|interval|onset)");
}

std::string to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr0"] = cfg.lr0;
  j["lr_decay"] = cfg.lr_decay;
  j["lr_step_epochs"] = cfg.lr_step_epochs;
  j["window"] = cfg.window;
  j["scorer"] = cfg.scorer == ScorerKind::Linear ? "linear" : "mlp";
  j["hidden"] = cfg.hidden;
  j["labeling"] = labeling_name(cfg.labeling);
  j["interval_seconds"] = cfg.labeling.kind == LabelingStrategy::Kind::FixedInterval
                              ? cfg.labeling.seconds
                              : 2.0;
  j["delta0"] = cfg.margin.delta0;
  j["lambda1"] = cfg.margin.lambda1;
  j["lambda2"] = cfg.margin.lambda2;
  j["w_pos"] = cfg.w_pos;
  j["w_neg"] = cfg.w_neg;
  j["d_min"] = cfg.sampler.d_min;
  j["d_max"] = cfg.sampler.d_max;
  j["pairs_per_sequence"] = cfg.sampler.pairs_per_sequence;
  j["ffr"] = cfg.ffr_enabled;
  j["amc"] = cfg.amc_enabled;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text, TrainConfig base) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ParseError("train config must be a JSON object");
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::remove_reference_t<decltype(field)>>();
    };
    get("epochs", base.epochs);
    get("batch_size", base.batch_size);
    get("lr0", base.lr0);
    get("lr_decay", base.lr_decay);
    get("lr_step_epochs", base.lr_step_epochs);
    get("window", base.window);
    if (j.contains("scorer")) {
      const auto kind = j["scorer"].get<std::string>();
      if (kind != "linear" && kind != "mlp") throw ConfigError("unknown scorer '" + kind + "'");
      base.scorer = kind == "linear" ? ScorerKind::Linear : ScorerKind::Mlp;
    }
    get("hidden", base.hidden);
    double seconds = base.labeling.kind == LabelingStrategy::Kind::FixedInterval
                         ? base.labeling.seconds
                         : 2.0;
    get("interval_seconds", seconds);
    std::string labeling = labeling_name(base.labeling);
    get("labeling", labeling);
    base.labeling = parse_labeling(labeling, seconds);
    get("delta0", base.margin.delta0);
    get("lambda1", base.margin.lambda1);
    get("lambda2", base.margin.lambda2);
    get("w_pos", base.w_pos);
    get("w_neg", base.w_neg);
    get("d_min", base.sampler.d_min);
    get("d_max", base.sampler.d_max);
    get("pairs_per_sequence", base.sampler.pairs_per_sequence);
    get("ffr", base.ffr_enabled);
    get("amc", base.amc_enabled);
    get("seed", base.seed);
    return base;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad train config: ") + e.what());
  }
}

std::string TrainLog::to_csv() const {
  std::string out = "epoch,l_bce,l_reg,l_mono,total,val_mauc,seconds\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + ',' + format_double(e.l_bce) + ',' + format_double(e.l_reg) +
           ',' + format_double(e.l_mono) + ',' + format_double(e.total) + ',' +
           (e.val_mauc ? format_double(*e.val_mauc) : std::string()) + ',' +
           format_double(e.seconds) + '\n';
  }
  return out;
}

RiskCurve score_sequence(const Scorer& scorer, const FrameSequence& seq, std::size_t window,
                         std::vector<Tape>* tapes) {
  const std::size_t n = seq.num_frames();
  std::vector<double> logits(n);
  std::vector<double> input(window * seq.feature_dim());
  Tape scratch;
  if (tapes != nullptr) tapes->resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    make_snippet(seq, t, window).flatten_into(input);
    logits[t] = scorer.forward(input, tapes != nullptr ? (*tapes)[t] : scratch);
  }
  return RiskCurve::from_logits(std::move(logits), seq.fps);
}

std::optional<double> batch_mean_abar(std::span<const RiskCurve> curves,
                                      const std::vector<bool>& is_accident) {
  if (curves.size() != is_accident.size()) throw ConfigError("one flag per curve required");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t v = 0; v < curves.size(); ++v) {
    if (!is_accident[v]) continue;
    for (double a : curves[v].scores) sum += a;
    count += curves[v].scores.size();
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

LabelSpec labeling(const FrameSequence& seq, const LabelingStrategy& strategy, double w_pos,
                   double w_neg) {
  LabelSpec spec;
  spec.strategy = strategy;
  const std::size_t n = seq.num_frames();
  if (!seq.is_accident) {
    spec.anchors.reserve(n);
    for (std::size_t t = 0; t < n; ++t) spec.anchors.push_back({t, 0, w_neg});
    return spec;
  }
  if (!seq.collision_index) throw ConfigError("accident sequence without collision_index");
  const std::size_t collision = *seq.collision_index;
  // First frame labeled positive under the dense strategies.
  std::size_t first_positive = collision;
  switch (strategy.kind) {
    case LabelingStrategy::Kind::OnlyCollision:
      spec.anchors = {{0, 0, w_neg}, {collision, 1, w_pos}};
      return spec;
    case LabelingStrategy::Kind::FixedInterval: {
      const auto span = static_cast<std::size_t>(std::llround(strategy.seconds * seq.fps));
      first_positive = span > collision ? 0 : collision + 1 - span;
      break;
    }
    case LabelingStrategy::Kind::AnomalyOnset:
      if (!seq.onset_index) throw ConfigError("anomaly-onset labeling needs onset_index");
      first_positive = *seq.onset_index;
      break;
  }
  spec.anchors.reserve(collision + 1);
  for (std::size_t t = 0; t <= collision; ++t) {
    const bool positive = t >= first_positive;
    spec.anchors.push_back({t, positive ? 1 : 0, positive ? w_pos : w_neg});
  }
  return spec;
}

double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
  return cfg.lr0 * std::pow(cfg.lr_decay, static_cast<double>(epoch / cfg.lr_step_epochs));
}

BatchPlan plan_batch(std::span<const FrameSequence* const> batch, const TrainConfig& cfg,
                     Rng& pair_rng) {
  BatchPlan plan;
  plan.pairs.resize(batch.size());
  if (!cfg.amc_enabled) return plan;
  for (std::size_t v = 0; v < batch.size(); ++v) {
    if (batch[v]->is_accident) {
      plan.pairs[v] = sample_pairs(batch[v]->num_frames(), cfg.sampler, pair_rng);
    }
  }
  return plan;
}

BatchResult evaluate_batch(const Scorer& scorer, std::span<const FrameSequence* const> batch,
                           const BatchPlan& plan, const TrainConfig& cfg, std::size_t workers) {
  const std::size_t members = batch.size();
  if (members == 0) throw ConfigError("empty batch");
  if (plan.pairs.size() != members) throw ConfigError("batch plan does not match batch");

  std::vector<RiskCurve> curves(members);
  std::vector<std::vector<Tape>> tapes(members);
  parallel_for(members, workers, [&](std::size_t v) {
    curves[v] = score_sequence(scorer, *batch[v], cfg.window, &tapes[v]);
  });

  std::vector<bool> accident(members);
  for (std::size_t v = 0; v < members; ++v) accident[v] = batch[v]->is_accident;

  BatchResult result;
  result.abar = plan.frozen_abar ? plan.frozen_abar : batch_mean_abar(curves, accident);

  const double scale = 1.0 / static_cast<double>(members);
  const std::size_t params = scorer.params().size();
  std::vector<LossReport> reports(members);
  std::vector<std::vector<double>> grads(members, std::vector<double>(params, 0.0));
  parallel_for(members, workers, [&](std::size_t v) {
    const FrameSequence& seq = *batch[v];
    const LabelSpec labels = labeling(seq, cfg.labeling, cfg.w_pos, cfg.w_neg);
    const LossTerms terms = seq.is_accident ? LossTerms{cfg.ffr_enabled, cfg.amc_enabled}
                                            : LossTerms{false, false};
    reports[v] = sequence_loss(curves[v].logits, labels, plan.pairs[v], result.abar, cfg.margin,
                               terms);
    for (std::size_t t = 0; t < seq.num_frames(); ++t) {
      scorer.backward(tapes[v][t], scale * reports[v].dlogits[t], grads[v]);
    }
  });

  // Fixed-order reduction keeps results independent of the worker count.
  result.grads.assign(params, 0.0);
  for (std::size_t v = 0; v < members; ++v) {
    const auto& r = reports[v];
    result.l_bce += scale * r.l_bce;
    result.l_reg += scale * r.l_reg;
    result.l_mono += scale * r.l_mono;
    result.total += scale * r.total;
    result.bce_clamped = result.bce_clamped || r.bce_clamped;
    for (std::size_t k = 0; k < params; ++k) result.grads[k] += grads[v][k];
  }
  return result;
}

TrainStreams::TrainStreams(const TrainConfig& cfg)
    : shuffle(mix_seed(cfg.seed, kShuffleStream)),
      pairs(mix_seed(mix_seed(cfg.seed, kPairStream), cfg.sampler.seed)) {}

EpochRecord train_epoch(Scorer& scorer, std::span<const FrameSequence> data,
                        const TrainConfig& cfg, std::size_t epoch, TrainStreams& streams,
                        std::size_t workers) {
  if (data.empty()) throw ConfigError("cannot train on an empty dataset");
  const auto start = std::chrono::steady_clock::now();
  EpochRecord record;
  record.epoch = epoch;
  record.lr = learning_rate(cfg, epoch);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), streams.shuffle);

  std::vector<const FrameSequence*> batch;
  std::size_t batch_index = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
    const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
    batch.clear();
    for (std::size_t k = begin; k < end; ++k) batch.push_back(&data[order[k]]);

    const BatchPlan plan = plan_batch(batch, cfg, streams.pairs);
    const BatchResult result = evaluate_batch(scorer, batch, plan, cfg, workers);
    if (!std::isfinite(result.total)) abort_non_finite(batch, result, cfg, epoch, batch_index);

    std::copy(result.grads.begin(), result.grads.end(), scorer.grads().begin());
    scorer.sgd_step(record.lr);

    const double w = static_cast<double>(batch.size()) / static_cast<double>(data.size());
    record.l_bce += w * result.l_bce;
    record.l_reg += w * result.l_reg;
    record.l_mono += w * result.l_mono;
    record.total += w * result.total;
  }
  scorer.zero_grad();
  record.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

ModelEvaluation evaluate_model(const Scorer& scorer, std::span<const FrameSequence> data,
                               std::size_t window, const EvalOptions& options) {
  ModelEvaluation eval;
  eval.curves.reserve(data.size());
  for (const auto& seq : data) eval.curves.push_back(score_sequence(scorer, seq, window));

  eval.clips = extract_clips(eval.curves, data, options.seed).clips;
  std::vector<double> negatives;
  std::vector<double> thresholds;
  for (const auto& c : eval.clips) {
    thresholds.push_back(c.score);
    if (c.label == 0) negatives.push_back(c.score);
  }
  std::vector<AccidentTrace> traces;
  for (std::size_t v = 0; v < data.size(); ++v) {
    const auto& seq = data[v];
    if (!seq.is_accident || !seq.onset_index || !seq.collision_index) continue;
    traces.push_back({eval.curves[v].scores, *seq.onset_index, *seq.collision_index, seq.fps});
  }
  const MttaResult tta = mtta(traces, negatives, thresholds, options.lambda);
  eval.report = aggregate(bucket_metrics(eval.clips, options.lambda), tta, options.lambda);
  return eval;
}

TrainResult train(std::span<const FrameSequence> data, const TrainConfig& cfg,
                  std::span<const FrameSequence> validation, const EvalOptions& val_options,
                  std::size_t workers) {
  cfg.validate();
  if (data.empty()) throw ConfigError("cannot train on an empty dataset");
  TrainResult result{Scorer::initialized(cfg.scorer_shape(data.front().feature_dim()),
                                         mix_seed(cfg.seed, kInitStream)),
                     {}};
  TrainStreams streams(cfg);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord record = train_epoch(result.scorer, data, cfg, epoch, streams, workers);
    if (!validation.empty()) {
      record.val_mauc = evaluate_model(result.scorer, validation, cfg.window, val_options).report.mauc_l;
    }
    result.log.epochs.push_back(record);
  }
  return result;
}

}  // namespace riskprop
