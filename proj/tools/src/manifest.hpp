#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dce::cli {

/// Hex SHA-256 of a file's bytes. Throws dce::Error("io_error").
std::string sha256_file(const std::string& path);

/// Audit record written next to each command's primary output as
/// `<output>.manifest.json`.
class RunManifest {
public:
  RunManifest(std::string command, std::vector<std::string> args);

  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void add_seed(const std::string& name, std::uint64_t value);
  void add_config(const std::string& name, const std::string& value);

  static std::string path_for(const std::string& output) { return output + ".manifest.json"; }
  /// Digests every input and output now and writes the manifest.
  void write(const std::string& path) const;

private:
  std::string command_;
  std::vector<std::string> args_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::map<std::string, std::uint64_t> seeds_;
  std::map<std::string, std::string> config_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::system_clock::time_point wall_start_;
};

} // namespace dce::cli
