#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace specband::cli {

/// Lowercase hex SHA-256 of a file's bytes. Throws Io when unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// Record of one command invocation, written as `manifest.json` at the root
/// of the output directory.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  nlohmann::json& config() { return config_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  /// Digests both files of a raster pair when `path` names one.
  void add_input(const std::string& role, const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  /// Milliseconds since construction, stored under `name`.
  void mark(const std::string& name);

  void write(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  nlohmann::json config_ = nlohmann::json::object();
  std::uint64_t seed_ = 0;
  nlohmann::json inputs_ = nlohmann::json::array();
  std::vector<std::filesystem::path> outputs_;
  nlohmann::json timings_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point start_;
};

}  // namespace specband::cli
