#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ritzcg/types.hpp"

namespace ritzcg {

inline constexpr const char* kVersion = "0.1.0";

/**
 * Record of one CLI run: the command, every resolved parameter, the seed and
 * checksums of the produced files. Re-running with an identical manifest
 * reproduces bit-identical CSV outputs.
 */
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> parameters;  // stable (sorted) key order
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::string rng_algorithm;
  std::map<std::string, std::string> output_checksums;

  void set(const std::string& key, const std::string& value) { parameters[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);

  bool operator==(const RunManifest& other) const {
    return command == other.command && parameters == other.parameters &&
           seed == other.seed && version == other.version;
  }
};

/// FNV-1a 64-bit checksum of a file, hex-encoded.
std::string file_checksum(const std::string& path);

/// Flat key-value JSON with stable key order.
void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

}  // namespace ritzcg
