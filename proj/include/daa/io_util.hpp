#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "daa/types.hpp"

namespace daa {

// fixed-format numeric printing so output files are byte-stable
std::string fmt_g(double v, int sig = 10);
std::string fmt_g17(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::uint64_t hash_file(const std::string& path);  // FNV-1a over raw bytes

// run manifest: full config echo + input hashes; no timestamps, so identical
// configurations reproduce byte-identical manifests
struct Manifest {
  std::string subcommand;
  std::string version;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;   // flag -> value, insertion order
  std::vector<std::pair<std::string, std::string>> inputs;   // path -> hex hash
  std::vector<std::string> outputs;

  void add(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
  void add_input(const std::string& path);
  std::string to_json() const;
};

inline const char* version_string() { return "1.0.0"; }

}  // namespace daa
