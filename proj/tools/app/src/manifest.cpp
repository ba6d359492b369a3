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

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "internal.hpp"
#include "json.hpp"
#include "riskprop/error.hpp"

#ifndef RISKPROP_VERSION
#define RISKPROP_VERSION "dev"
#endif

namespace riskprop::app {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string code_version() { return "riskprop " RISKPROP_VERSION; }

void write_manifest(const fs::path& dir, const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["config"] = nlohmann::ordered_json::parse(manifest.config_json);
  j["dataset_hash"] = manifest.dataset_hash;
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["out_dir"] = manifest.out_dir;
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

std::optional<Manifest> read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_text(path));
    Manifest m;
    m.command = j.value("command", "");
    m.config_json = j.contains("config") ? j["config"].dump() : "{}";
    m.dataset_hash = j.value("dataset_hash", "");
    m.seed = j.value("seed", std::uint64_t{0});
    m.version = j.value("version", "");
    m.out_dir = j.value("out_dir", "");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace riskprop::app
