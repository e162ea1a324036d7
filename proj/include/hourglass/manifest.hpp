// manifest.hpp — reproducibility record for CLI runs: command line, input
// fingerprints, effective options, and timing, serialized as JSON.
// SPDX-License-Identifier: MIT
#pragma once

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hourglass/common.hpp"

namespace hg {

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json inputs = nlohmann::json::object();   // name -> fnv1a hex
  nlohmann::json options = nlohmann::json::object();  // flag -> value
  nlohmann::json results = nlohmann::json::object();
  double wall_seconds = 0.0;

  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void finish() {
    wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "hgc2";
    j["version"] = "1.0.0";
    j["command"] = command;
    j["argv"] = argv;
    j["inputs"] = inputs;
    j["options"] = options;
    j["results"] = results;
    j["wall_seconds"] = wall_seconds;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    require(bool(out), "cannot open manifest path: " + path);
    out << to_json().dump(2) << "\n";
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hg
