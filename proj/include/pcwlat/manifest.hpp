#pragma once

#include <map>
#include <string>
#include <vector>

namespace pcwlat {

inline constexpr const char* tool_version = "pcwlat 1.0.0";

// Provenance record attached to every CLI artifact.  Outputs are a pure
// function of (config hash, data hashes, constants version, tool version);
// the timestamp is informational only.
struct RunManifest {
  std::string tool;
  std::string constants_version;
  std::string config_hash;
  std::map<std::string, std::string> data_file_hashes;
  std::string timestamp_utc;
};

RunManifest make_manifest(const std::string& config_bytes,
                          const std::vector<std::string>& data_files);

// ordered-key JSON text (trailing newline included)
std::string manifest_json(const RunManifest& manifest);

}  // namespace pcwlat
