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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace riskprop::app {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// One per run, written next to the run's outputs.
struct Manifest {
  std::string command;
  std::string config_json;  // snapshot of the effective configuration
  std::string dataset_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string out_dir;
};

std::string code_version();
void write_manifest(const fs::path& dir, const Manifest& manifest);
std::optional<Manifest> read_manifest(const fs::path& dir);

struct PlotSeries {
  std::string name;
  std::string color;
  std::vector<double> y;
};

struct PlotMarker {
  double x = 0.0;
  std::string label;
};

// Line plot on a [0, 1] y-axis: one <polyline> per series, the alert
// threshold and markers drawn as <line>s.
std::string svg_plot(const std::string& title, const std::vector<double>& x,
                     const std::vector<PlotSeries>& series, std::optional<double> threshold,
                     const std::vector<PlotMarker>& markers, const std::string& x_label);

}  // namespace riskprop::app
