#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmimo/config.hpp"

namespace dmimo::cli {

// Output directory that remembers every file it writes, for the run manifest.
class RunOutputs {
 public:
  RunOutputs(std::filesystem::path dir, std::string command, std::vector<std::string> argv);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& name, const std::function<void(std::ostream&)>& fn);
  void add_input(const std::string& path) { inputs_.push_back(path); }

  // manifest.json; not listed in itself.
  void finish(const SystemConfig& cfg, const nlohmann::json& extra = nlohmann::json::object());

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::vector<std::string> argv_;
  std::vector<std::string> inputs_;
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace dmimo::cli
