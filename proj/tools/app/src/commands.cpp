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

#include "riskprop/app/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "internal.hpp"
#include "riskprop/error.hpp"
#include "riskprop/hash.hpp"
#include "riskprop/parallel.hpp"

namespace riskprop::app {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create " + out.string() + ": " + ec.message());
  return out;
}

fs::path resolve_checkpoint(const fs::path& checkpoint) {
  if (fs::is_directory(checkpoint)) return checkpoint / kCheckpointFile;
  return checkpoint;
}

void write_manifest_for(const fs::path& out, const std::string& command, const std::string& config,
                        const std::string& hash, std::uint64_t seed) {
  write_manifest(out, {command, config, hash, seed, code_version(), out.string()});
}

}  // namespace

std::string dataset_hash(const fs::path& data_dir) {
  Fnv1a64 h;
  for (const char* name : {kTrainFile, kTestFile}) {
    const fs::path p = data_dir / name;
    if (fs::exists(p)) h.update(read_text(p));
  }
  return h.hex();
}

std::vector<FrameSequence> load_split(const fs::path& data_dir, const std::string& split) {
  if (split != "train" && split != "test") {
    throw ConfigError("split must be 'train' or 'test', got '" + split + "'");
  }
  const fs::path p = data_dir / (split + ".jsonl");
  if (!fs::exists(p)) throw std::runtime_error("dataset file not found: " + p.string());
  try {
    return read_dataset(p);
  } catch (const ParseError& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void cmd_gen(const GenConfig& cfg, const fs::path& out) {
  cfg.validate();
  prepare_out(out);
  DatasetSplit split = split_dataset(generate(cfg), cfg.train_fraction, cfg.seed);
  write_dataset(split.train, out / kTrainFile);
  write_dataset(split.test, out / kTestFile);
  write_manifest_for(out, "gen", to_json(cfg), dataset_hash(out), cfg.seed);
}

TrainLog cmd_train(const TrainRequest& request) {
  TrainConfig cfg = request.cfg;
  cfg.validate();
  const auto train_data = load_split(request.data, "train");
  std::vector<FrameSequence> validation;
  if (request.validate && fs::exists(request.data / kTestFile)) {
    validation = load_split(request.data, "test");
  }
  prepare_out(request.out);
  cfg.nan_dump_path = (request.out / "nan_batch.jsonl").string();

  TrainResult result = train(train_data, cfg, validation, {0.1, cfg.seed}, worker_count());
  result.scorer.save(request.out / kCheckpointFile);
  write_text(request.out / "train_log.csv", result.log.to_csv());
  write_text(request.out / "config.json", to_json(cfg) + "\n");
  write_manifest_for(request.out, "train", to_json(cfg), dataset_hash(request.data), cfg.seed);
  return result.log;
}

MetricReport cmd_eval(const EvalRequest& request) {
  const fs::path checkpoint = resolve_checkpoint(request.checkpoint);
  if (!fs::exists(checkpoint)) throw std::runtime_error("checkpoint not found: " + checkpoint.string());
  const std::string hash = dataset_hash(request.data);
  if (const auto trained = read_manifest(checkpoint.parent_path()); trained && !request.force) {
    if (!trained->dataset_hash.empty() && trained->dataset_hash != hash) {
      throw std::runtime_error("dataset hash " + hash + " differs from checkpoint manifest (" +
                               trained->dataset_hash + "); pass --force to evaluate anyway");
    }
  }
  const Scorer scorer = Scorer::load(checkpoint);
  const auto data = load_split(request.data, request.split);
  const ModelEvaluation eval =
      evaluate_model(scorer, data, scorer.shape().window, {request.lambda, request.seed});

  prepare_out(request.out);
  write_text(request.out / "report.json", eval.report.to_json() + "\n");
  write_text(request.out / "clips.csv", clips_to_csv(eval.clips));
  const std::string config = "{\"checkpoint\": \"" + checkpoint.generic_string() +
                             "\", \"split\": \"" + request.split +
                             "\", \"lambda\": " + fmt17(request.lambda) + "}";
  write_manifest_for(request.out, "eval", config, hash, request.seed);
  return eval.report;
}

void cmd_curves(const CurvesRequest& request) {
  const fs::path checkpoint = resolve_checkpoint(request.checkpoint);
  if (!fs::exists(checkpoint)) throw std::runtime_error("checkpoint not found: " + checkpoint.string());
  const Scorer scorer = Scorer::load(checkpoint);
  const auto data = load_split(request.data, request.split);
  const fs::path dir = prepare_out(request.out) / "curves";
  prepare_out(dir);

  // Collision-aligned sums: index k = k frames before collision.
  std::vector<double> score_sum;
  std::vector<double> hazard_sum;
  std::vector<std::size_t> count;
  double fps = 10.0;
  std::size_t plotted = 0;

  for (std::size_t v = 0; v < data.size(); ++v) {
    const FrameSequence& seq = data[v];
    const RiskCurve curve = score_sequence(scorer, seq, scorer.shape().window);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "video_%04zu", v);

    std::string csv = "frame,z,a,latent_hazard,onset,collision\n";
    for (std::size_t t = 0; t < seq.num_frames(); ++t) {
      csv += std::to_string(t) + ',' + fmt17(curve.logits[t]) + ',' + fmt17(curve.scores[t]) + ',' +
             (seq.latent_hazard ? fmt17((*seq.latent_hazard)[t]) : std::string()) + ',' +
             (seq.onset_index == t ? "1" : "0") + ',' + (seq.collision_index == t ? "1" : "0") +
             '\n';
    }
    write_text(dir / (std::string(stem) + ".csv"), csv);

    if (request.max_plots == 0 || plotted < request.max_plots) {
      std::vector<double> x(seq.num_frames());
      for (std::size_t t = 0; t < x.size(); ++t) x[t] = static_cast<double>(t);
      std::vector<PlotSeries> series = {{"risk a_t", "#1f77b4", curve.scores}};
      if (seq.latent_hazard) series.push_back({"latent hazard", "#2ca02c", *seq.latent_hazard});
      std::vector<PlotMarker> markers;
      if (seq.onset_index) markers.push_back({static_cast<double>(*seq.onset_index), "onset"});
      if (seq.collision_index) markers.push_back({static_cast<double>(*seq.collision_index), "collision"});
      const std::string title = std::string(stem) + (seq.is_accident ? " (accident)" : " (safe)");
      write_text(dir / (std::string(stem) + ".svg"),
                 svg_plot(title, x, series, request.threshold, markers, "frame"));
      ++plotted;
    }

    if (!seq.is_accident || !seq.collision_index) continue;
    fps = seq.fps;
    const std::size_t collision = *seq.collision_index;
    if (score_sum.size() < collision + 1) {
      score_sum.resize(collision + 1, 0.0);
      hazard_sum.resize(collision + 1, 0.0);
      count.resize(collision + 1, 0);
    }
    for (std::size_t k = 0; k <= collision; ++k) {
      score_sum[k] += curve.scores[collision - k];
      if (seq.latent_hazard) hazard_sum[k] += (*seq.latent_hazard)[collision - k];
      ++count[k];
    }
  }

  std::string csv = "offset_frames,seconds_before_collision,mean_score,mean_hazard,count\n";
  std::vector<double> x;
  std::vector<double> mean_score;
  std::vector<double> mean_hazard;
  // Oldest offset first so the plot reads left to right towards the collision.
  for (std::size_t k = score_sum.size(); k-- > 0;) {
    const double n = static_cast<double>(count[k]);
    const double ms = score_sum[k] / n;
    const double mh = hazard_sum[k] / n;
    csv += std::to_string(k) + ',' + fmt17(static_cast<double>(k) / fps) + ',' + fmt17(ms) + ',' +
           fmt17(mh) + ',' + std::to_string(count[k]) + '\n';
    x.push_back(-static_cast<double>(k) / fps);
    mean_score.push_back(ms);
    mean_hazard.push_back(mh);
  }
  write_text(request.out / "mean_curve.csv", csv);
  write_text(request.out / "mean_curve.svg",
             svg_plot("dataset mean risk aligned to collision", x,
                      {{"mean risk", "#1f77b4", mean_score}, {"mean latent hazard", "#2ca02c", mean_hazard}},
                      request.threshold, {{0.0, "collision"}}, "seconds relative to collision"));
  const std::string config = "{\"checkpoint\": \"" + checkpoint.generic_string() + "\", \"split\": \"" +
                             request.split + "\", \"threshold\": " + fmt17(request.threshold) + "}";
  write_manifest_for(request.out, "curves", config, dataset_hash(request.data), 0);
}

std::vector<AblationCell> cmd_ablate(const AblateRequest& request) {
  request.base.validate();
  const auto train_data = load_split(request.data, "train");
  const auto test_data = load_split(request.data, "test");
  prepare_out(request.out);
  auto cells = run_ablation(train_data, test_data, request.base,
                            {request.lambda, request.base.seed}, request.workers);
  for (const auto& cell : cells) {
    if (!cell.scorer) continue;
    const fs::path dir = request.out / "cells" /
                         ("exp" + std::to_string(cell.exp) + "_" + labeling_name(cell.labeling));
    prepare_out(dir);
    cell.scorer->save(dir / kCheckpointFile);
  }
  write_text(request.out / "ablation.csv", ablation_csv(cells));
  write_text(request.out / "ablation.txt", ablation_table(cells));
  write_manifest_for(request.out, "ablate", to_json(request.base), dataset_hash(request.data),
                     request.base.seed);
  return cells;
}

namespace {

template <typename T>
void set_if(const CLI::Option* opt, T& dst, const T& value) {
  if (opt->count() > 0) dst = value;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"riskprop: collision-anchored risk propagation on synthetic dashcam sequences"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir = ".";
  auto* seed_opt = app.add_option("--seed", seed, "Root seed for every random stream");
  app.add_option("--config", config_path, "JSON config file (flags override its fields)")
      ->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "Output directory");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic train/test dataset");
  GenConfig g;
  std::string ramp = "sigmoid";
  auto* g_acc = gen->add_option("--accidents", g.num_accident, "Accident videos");
  auto* g_safe = gen->add_option("--safe", g.num_safe, "Accident-free videos");
  auto* g_frames = gen->add_option("--frames", g.frames_per_video, "Frames per video");
  auto* g_dim = gen->add_option("--feature-dim", g.feature_dim, "Feature dimension");
  auto* g_sig = gen->add_option("--signal-dims", g.signal_dims, "Dimensions carrying the hazard");
  auto* g_noise = gen->add_option("--noise", g.noise_sigma, "Gaussian noise sigma");
  auto* g_lo = gen->add_option("--onset-lo", g.onset_lo, "Earliest onset as a fraction of length");
  auto* g_hi = gen->add_option("--onset-hi", g.onset_hi, "Latest onset as a fraction of length");
  auto* g_ramp = gen->add_option("--ramp", ramp, "Hazard ramp: linear|sigmoid")
                     ->check(CLI::IsMember({"linear", "sigmoid"}));
  auto* g_steep = gen->add_option("--steepness", g.ramp_steepness, "Sigmoid ramp slope");
  auto* g_fps = gen->add_option("--fps", g.fps, "Frames per second");
  auto* g_dist = gen->add_option("--distractors", g.distractor_fraction,
                                 "Share of safe videos with a distractor bump");
  auto* g_amp = gen->add_option("--distractor-amplitude", g.distractor_amplitude, "Bump height");
  auto* g_split = gen->add_option("--train-fraction", g.train_fraction, "Train share per class");

  // Shared training flags for train and ablate.
  struct TrainFlags {
    TrainConfig v;
    std::string labeling = "collision";
    std::string scorer = "linear";
    std::vector<CLI::Option*> opts;
    CLI::Option *epochs, *batch, *lr, *window, *scorer_opt, *hidden, *labeling_opt, *interval,
        *l1, *l2, *delta0, *wpos, *wneg, *dmin, *dmax, *pairs;
    bool no_ffr = false;
    bool no_amc = false;

    void add(CLI::App* cmd, bool with_ablation_switches) {
      epochs = cmd->add_option("--epochs", v.epochs, "Training epochs");
      batch = cmd->add_option("--batch-size", v.batch_size, "Videos per SGD step");
      lr = cmd->add_option("--lr", v.lr0, "Initial learning rate");
      window = cmd->add_option("--window", v.window, "Observed frames per snippet");
      scorer_opt = cmd->add_option("--scorer", scorer, "linear|mlp")->check(CLI::IsMember({"linear", "mlp"}));
      hidden = cmd->add_option("--hidden", v.hidden, "MLP hidden width");
      interval = cmd->add_option("--interval-seconds", v.labeling.seconds, "Fixed-interval window");
      l1 = cmd->add_option("--lambda1", v.margin.lambda1, "Future-frame regularization weight");
      l2 = cmd->add_option("--lambda2", v.margin.lambda2, "Monotonic constraint weight");
      delta0 = cmd->add_option("--delta0", v.margin.delta0, "Margin scale");
      wpos = cmd->add_option("--w-pos", v.w_pos, "Positive anchor weight");
      wneg = cmd->add_option("--w-neg", v.w_neg, "Negative anchor weight");
      dmin = cmd->add_option("--d-min", v.sampler.d_min, "Minimum pair offset");
      dmax = cmd->add_option("--d-max", v.sampler.d_max, "Maximum pair offset");
      pairs = cmd->add_option("--pairs", v.sampler.pairs_per_sequence, "Pairs per sequence");
      labeling_opt = nullptr;
      if (with_ablation_switches) {
        labeling_opt = cmd->add_option("--labeling", labeling, "collision|interval|onset")
                           ->check(CLI::IsMember({"collision", "interval", "onset"}));
        cmd->add_flag("--no-ffr", no_ffr, "Disable future-frame regularization");
        cmd->add_flag("--no-amc", no_amc, "Disable the monotonic constraint");
      }
    }

    TrainConfig resolve(TrainConfig cfg) const {
      set_if(epochs, cfg.epochs, v.epochs);
      set_if(batch, cfg.batch_size, v.batch_size);
      set_if(lr, cfg.lr0, v.lr0);
      set_if(window, cfg.window, v.window);
      if (scorer_opt->count() > 0) cfg.scorer = scorer == "mlp" ? ScorerKind::Mlp : ScorerKind::Linear;
      set_if(hidden, cfg.hidden, v.hidden);
      const double seconds = interval->count() > 0 ? v.labeling.seconds
                             : cfg.labeling.kind == LabelingStrategy::Kind::FixedInterval
                                 ? cfg.labeling.seconds
                                 : 2.0;
      if (labeling_opt != nullptr && labeling_opt->count() > 0) {
        cfg.labeling = parse_labeling(labeling, seconds);
      } else if (cfg.labeling.kind == LabelingStrategy::Kind::FixedInterval) {
        cfg.labeling.seconds = seconds;
      }
      set_if(l1, cfg.margin.lambda1, v.margin.lambda1);
      set_if(l2, cfg.margin.lambda2, v.margin.lambda2);
      set_if(delta0, cfg.margin.delta0, v.margin.delta0);
      set_if(wpos, cfg.w_pos, v.w_pos);
      set_if(wneg, cfg.w_neg, v.w_neg);
      set_if(dmin, cfg.sampler.d_min, v.sampler.d_min);
      set_if(dmax, cfg.sampler.d_max, v.sampler.d_max);
      set_if(pairs, cfg.sampler.pairs_per_sequence, v.sampler.pairs_per_sequence);
      if (no_ffr) cfg.ffr_enabled = false;
      if (no_amc) cfg.amc_enabled = false;
      return cfg;
    }
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a scorer on a generated dataset");
  std::string train_data;
  bool no_validate = false;
  train_cmd->add_option("--data", train_data, "Dataset directory")->required();
  train_cmd->add_flag("--no-validate", no_validate, "Skip per-epoch validation on the test split");
  TrainFlags train_flags;
  train_flags.add(train_cmd, true);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint under the FAR-constrained protocol");
  EvalRequest eval_req;
  std::string eval_data;
  std::string eval_ckpt;
  eval_cmd->add_option("--data", eval_data, "Dataset directory")->required();
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint file or run directory")->required();
  eval_cmd->add_option("--split", eval_req.split, "train|test")->check(CLI::IsMember({"train", "test"}));
  eval_cmd->add_option("--lambda", eval_req.lambda, "FAR limit")->check(CLI::Range(1e-9, 1.0));
  eval_cmd->add_flag("--force", eval_req.force, "Evaluate even if the dataset hash differs");

  // curves
  auto* curves_cmd = app.add_subcommand("curves", "Export per-video risk curves and plots");
  CurvesRequest curves_req;
  std::string curves_data;
  std::string curves_ckpt;
  curves_cmd->add_option("--data", curves_data, "Dataset directory")->required();
  curves_cmd->add_option("--checkpoint", curves_ckpt, "Checkpoint file or run directory")->required();
  curves_cmd->add_option("--split", curves_req.split, "train|test")->check(CLI::IsMember({"train", "test"}));
  curves_cmd->add_option("--threshold", curves_req.threshold, "Alert threshold drawn on plots");
  curves_cmd->add_option("--max-plots", curves_req.max_plots, "Plot at most N videos (0 = all)");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the 4 x 3 loss/labeling ablation grid");
  std::string ablate_data;
  double ablate_lambda = 0.1;
  ablate_cmd->add_option("--data", ablate_data, "Dataset directory")->required();
  ablate_cmd->add_option("--lambda", ablate_lambda, "FAR limit")->check(CLI::Range(1e-9, 1.0));
  TrainFlags ablate_flags;
  ablate_flags.add(ablate_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version are reported as parse "errors" with exit code 0.
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return e.get_exit_code();
  }

  try {
    const std::string config_text = config_path.empty() ? std::string() : read_text(config_path);
    const fs::path out_path(out_dir);

    if (gen->parsed()) {
      GenConfig cfg = config_text.empty() ? GenConfig{} : gen_config_from_json(config_text);
      set_if(g_acc, cfg.num_accident, g.num_accident);
      set_if(g_safe, cfg.num_safe, g.num_safe);
      set_if(g_frames, cfg.frames_per_video, g.frames_per_video);
      set_if(g_dim, cfg.feature_dim, g.feature_dim);
      set_if(g_sig, cfg.signal_dims, g.signal_dims);
      set_if(g_noise, cfg.noise_sigma, g.noise_sigma);
      set_if(g_lo, cfg.onset_lo, g.onset_lo);
      set_if(g_hi, cfg.onset_hi, g.onset_hi);
      if (g_ramp->count() > 0) cfg.ramp_shape = parse_ramp_shape(ramp);
      set_if(g_steep, cfg.ramp_steepness, g.ramp_steepness);
      set_if(g_fps, cfg.fps, g.fps);
      set_if(g_dist, cfg.distractor_fraction, g.distractor_fraction);
      set_if(g_amp, cfg.distractor_amplitude, g.distractor_amplitude);
      set_if(g_split, cfg.train_fraction, g.train_fraction);
      set_if(seed_opt, cfg.seed, seed);
      cmd_gen(cfg, out_path);
      out << "wrote " << (out_path / kTrainFile).string() << ", " << (out_path / kTestFile).string()
          << " (dataset " << dataset_hash(out_path) << ")\n";
    } else if (train_cmd->parsed()) {
      TrainConfig base = config_text.empty() ? TrainConfig{} : train_config_from_json(config_text);
      TrainRequest req;
      req.data = train_data;
      req.out = out_path;
      req.cfg = train_flags.resolve(base);
      set_if(seed_opt, req.cfg.seed, seed);
      req.cfg.sampler.seed = req.cfg.seed;
      req.validate = !no_validate;
      const TrainLog log = cmd_train(req);
      const auto& last = log.epochs.back();
      out << "trained " << log.epochs.size() << " epochs; final loss " << last.total;
      if (last.val_mauc) out << ", validation mAUC^0.1 " << *last.val_mauc;
      out << "\n";
    } else if (eval_cmd->parsed()) {
      eval_req.data = eval_data;
      eval_req.checkpoint = eval_ckpt;
      eval_req.out = out_path;
      eval_req.seed = seed;
      const MetricReport report = cmd_eval(eval_req);
      out << report.to_json() << "\n";
    } else if (curves_cmd->parsed()) {
      curves_req.data = curves_data;
      curves_req.checkpoint = curves_ckpt;
      curves_req.out = out_path;
      cmd_curves(curves_req);
      out << "wrote curves under " << (out_path / "curves").string() << "\n";
    } else if (ablate_cmd->parsed()) {
      TrainConfig base = config_text.empty() ? TrainConfig{} : train_config_from_json(config_text);
      AblateRequest req;
      req.data = ablate_data;
      req.out = out_path;
      req.base = ablate_flags.resolve(base);
      set_if(seed_opt, req.base.seed, seed);
      req.base.sampler.seed = req.base.seed;
      req.lambda = ablate_lambda;
      req.workers = worker_count();
      const auto cells = cmd_ablate(req);
      out << ablation_table(cells);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace riskprop::app
