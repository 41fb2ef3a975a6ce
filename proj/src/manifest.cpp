#include "pcwlat/manifest.hpp"

#include <ctime>

#include <json.hpp>

#include "pcwlat/constants.hpp"
#include "pcwlat/grid_io.hpp"

namespace pcwlat {

RunManifest make_manifest(const std::string& config_bytes,
                          const std::vector<std::string>& data_files) {
  RunManifest m;
  m.tool = tool_version;
  m.constants_version = constants::version;
  m.config_hash = bytes_hash(config_bytes);
  for (const auto& path : data_files) m.data_file_hashes[path] = file_hash(path);
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m.timestamp_utc = buf;
  return m;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = m.tool;
  j["constants_version"] = m.constants_version;
  j["config_hash"] = m.config_hash;
  j["data_file_hashes"] = m.data_file_hashes;
  j["timestamp_utc"] = m.timestamp_utc;
  return j.dump(2) + "\n";
}

}  // namespace pcwlat
