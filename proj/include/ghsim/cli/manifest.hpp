#pragma once

#include <sys/resource.h>

#include <chrono>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "ghsim/core/error.hpp"
#include "ghsim/core/hash.hpp"

namespace ghsim::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Peak resident set size of this process in KiB.
inline long peak_memory_kib() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;   // path -> content digest
  std::map<std::string, std::string> outputs;  // path -> content digest
  double wall_seconds = 0;
  long peak_memory_kib = 0;
  nlohmann::json details = nlohmann::json::object();

  void add_input(const std::string& path) {
    if (!path.empty()) inputs[path] = digest_file(path);
  }
  void add_output(const std::string& path) { outputs[path] = digest_file(path); }

  nlohmann::json to_json() const {
    return {{"command", command},
            {"tool_version", std::string(kToolVersion)},
            {"config_hash", config_hash},
            {"seed", seed},
            {"inputs", inputs},
            {"outputs", outputs},
            {"wall_seconds", wall_seconds},
            {"peak_memory_kib", peak_memory_kib},
            {"details", details}};
  }
};

inline std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

/// Records elapsed time and peak memory and writes the manifest next to `out`.
class ManifestScope {
 public:
  explicit ManifestScope(std::string command) : start_(std::chrono::steady_clock::now()) { m_.command = std::move(command); }

  RunManifest& manifest() { return m_; }

  void write(const std::string& out) {
    m_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m_.peak_memory_kib = peak_memory_kib();
    const auto path = manifest_path(out);
    std::ofstream f(path);
    if (!f) fail(ErrorCode::Io, "cannot write " + path);
    f << m_.to_json().dump(2) << '\n';
  }

 private:
  RunManifest m_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ghsim::cli
