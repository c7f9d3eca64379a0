#pragma once

#include <string>
#include <vector>

#include "ritzcg/manifest.hpp"
#include "ritzcg/ritz.hpp"

namespace ritzcg {

/// Parses a command line into the resolved manifest (defaults filled in).
/// Throws CliUsageError on unknown flags or missing required arguments.
class CliUsageError : public Error {
 public:
  explicit CliUsageError(const std::string& what) : Error(what) {}
};

RunManifest parse_cli(const std::vector<std::string>& args);

/// Full CLI entry point. Exit codes: 0 success, 1 numerical failure, 2 usage.
int run_cli(const std::vector<std::string>& args);

/// Scalar Ritz persistence (theta, projections, solve weight); enough to
/// postprocess L-curves and sweeps across invocations.
void write_ritz_json(const std::string& path, const RitzSet& ritz);
RitzSet read_ritz_json(const std::string& path);

}  // namespace ritzcg
