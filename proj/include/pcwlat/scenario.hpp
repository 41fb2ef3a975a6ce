#pragma once

#include <map>
#include <string>
#include <vector>

namespace pcwlat {

struct RunOptions {
  std::string out_dir = ".";
  int threads = 0;  // 0: all hardware threads
  std::string format = "csv";  // csv | json
  std::string species_file;    // empty: the shipped reference data
};

struct RunResult {
  std::vector<std::string> artifacts;          // paths written (incl. manifest)
  std::map<std::string, double> summary;       // flat scalars, used by sweep
};

// Runs one scenario config (JSON text).  `expected_kind` enforces that the
// config matches the CLI subcommand; pass "" to accept any.
RunResult run_scenario(const std::string& config_bytes, const std::string& expected_kind,
                       const RunOptions& options);

// Full command-line front end (flags, env overrides, error JSON on stderr).
int run_cli(const std::vector<std::string>& args);

}  // namespace pcwlat
