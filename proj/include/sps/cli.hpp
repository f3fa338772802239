#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sps {

enum ExitCode : int {
  exit_pass = 0,
  exit_usage = 1,
  exit_nonconvergence = 2,
  exit_diagnostics = 3,
};

/// Entry point of the `sps` tool. Commands: solve, spectrum, p2, diagnose,
/// probe, rescale, export. Output files go to --out, else $SPS_OUT_DIR,
/// else the current directory.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

/// Parses `key = value` lines; blank lines and lines starting with # are
/// skipped. Throws ConfigError on a line without '='.
std::vector<std::pair<std::string, std::string>>
parse_config_file(const std::string &path);

} // namespace sps
