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

#include <array>
#include <cstdio>
#include <exception>
#include <string>

#include "riskprop/app/commands.hpp"
#include "riskprop/parallel.hpp"

namespace riskprop::app {
namespace {

constexpr std::array<const char*, 5> kExpNames = {"", "I", "II", "III", "IV"};

std::string cell_value(const std::optional<double>& v, const char* fmt = "%.4f") {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, *v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::vector<AblationCell> run_ablation(std::span<const FrameSequence> train_data,
                                       std::span<const FrameSequence> test_data,
                                       const TrainConfig& base, const EvalOptions& eval,
                                       std::size_t workers) {
  std::vector<AblationCell> cells;
  const double seconds = base.labeling.kind == LabelingStrategy::Kind::FixedInterval
                             ? base.labeling.seconds
                             : 2.0;
  for (const auto& labeling : {LabelingStrategy::anomaly_onset(),
                               LabelingStrategy::fixed_interval(seconds),
                               LabelingStrategy::only_collision()}) {
    for (int exp = 1; exp <= 4; ++exp) {
      cells.emplace_back();
      cells.back().exp = exp;
      cells.back().labeling = labeling;
    }
  }
  // Cells are independent; each trains single-threaded from the shared seed.
  parallel_for(cells.size(), workers, [&](std::size_t k) {
    AblationCell& cell = cells[k];
    try {
      TrainConfig cfg = base;
      cfg.labeling = cell.labeling;
      cfg.ffr_enabled = cell.ffr();
      cfg.amc_enabled = cell.amc();
      TrainResult trained = train(train_data, cfg);
      cell.report = evaluate_model(trained.scorer, test_data, cfg.window, eval).report;
      cell.scorer = std::move(trained.scorer);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return cells;
}

std::string ablation_csv(std::span<const AblationCell> cells) {
  std::string out = "exp,ffr,amc,labeling,mauc_l,mauc,map,mtta_l,status\n";
  for (const auto& c : cells) {
    const auto* r = c.report ? &*c.report : nullptr;
    out += std::string(kExpNames[c.exp]) + ',' + (c.ffr() ? "1" : "0") + ',' +
           (c.amc() ? "1" : "0") + ',' + labeling_name(c.labeling) + ',' +
           cell_value(r ? r->mauc_l : std::nullopt, "%.6f") + ',' +
           cell_value(r ? r->mauc : std::nullopt, "%.6f") + ',' +
           cell_value(r ? r->map : std::nullopt, "%.6f") + ',' +
           cell_value(r ? std::optional<double>(r->mtta_l) : std::nullopt, "%.6f") + ',';
    std::string status = c.error.empty() ? "ok" : "failed: " + c.error;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out += status + '\n';
  }
  return out;
}

std::string ablation_table(std::span<const AblationCell> cells) {
  const std::array<std::size_t, 8> widths = {5, 5, 5, 11, 10, 8, 8, 10};
  const std::array<const char*, 8> head = {"Exp", "FFR", "AMC", "labeling", "mAUC^l", "mAUC",
                                           "mAP", "mTTA^l(s)"};
  std::string out;
  for (std::size_t k = 0; k < head.size(); ++k) out += pad(head[k], widths[k]);
  out += '\n';
  for (const auto& c : cells) {
    const auto* r = c.report ? &*c.report : nullptr;
    const std::array<std::string, 8> row = {
        kExpNames[c.exp],
        c.ffr() ? "x" : "-",
        c.amc() ? "x" : "-",
        labeling_name(c.labeling),
        cell_value(r ? r->mauc_l : std::nullopt, "%.3f"),
        cell_value(r ? r->mauc : std::nullopt, "%.3f"),
        cell_value(r ? r->map : std::nullopt, "%.3f"),
        cell_value(r ? std::optional<double>(r->mtta_l) : std::nullopt, "%.3f")};
    for (std::size_t k = 0; k < row.size(); ++k) out += pad(row[k], widths[k]);
    if (!c.error.empty()) out += "  failed: " + c.error;
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace riskprop::app
