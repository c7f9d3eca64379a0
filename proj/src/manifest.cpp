#include "ritzcg/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "ritzcg/csv.hpp"

namespace ritzcg {

void RunManifest::set(const std::string& key, double value) {
  parameters[key] = format_number(value);
}

void RunManifest::set(const std::string& key, long long value) {
  parameters[key] = std::to_string(value);
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "file_checksum: cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[4096];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
    if (in.eof()) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  return hex;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["rng_algorithm"] = manifest.rng_algorithm;
  for (const auto& [key, value] : manifest.parameters) j["param." + key] = value;
  for (const auto& [key, value] : manifest.output_checksums) j["checksum." + key] = value;

  std::ofstream out(path);
  require(out.good(), "write_manifest: cannot open " + path);
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_manifest: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  RunManifest manifest;
  manifest.command = j.value("command", "");
  manifest.seed = j.value("seed", std::uint64_t{0});
  manifest.version = j.value("version", "");
  manifest.rng_algorithm = j.value("rng_algorithm", "");
  for (const auto& [key, value] : j.items()) {
    if (key.rfind("param.", 0) == 0)
      manifest.parameters[key.substr(6)] = value.get<std::string>();
    else if (key.rfind("checksum.", 0) == 0)
      manifest.output_checksums[key.substr(9)] = value.get<std::string>();
  }
  return manifest;
}

}  // namespace ritzcg
