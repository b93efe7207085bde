#pragma once

// Run manifest written next to every command's outputs: which command ran,
// a hash of the config it consumed, the seed, tool version and the produced
// files. Timestamps make manifests non-reproducible by design; data outputs
// stay byte-identical across reruns.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "dyngame/errors.hpp"
#include "dyngame/version.hpp"

namespace dyngame {

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

struct RunManifest {
  std::string command;
  std::string config_hash;
  unsigned long long seed = 0;
  std::vector<std::string> outputs;

  void write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["tool_version"] = kVersion;
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    j["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
  }
};

}  // namespace dyngame
