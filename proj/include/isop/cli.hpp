#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace isop {

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitPrecondition = 2, kExitViolation = 3 };

struct RunSpec {
  std::string command;  // estimate | symmetrize | verify | sweep
  std::string target;   // operation name
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string output;  // empty: stdout
  std::string format = "json";
  std::string range;   // sweep: "key=v1,v2,..."
  std::string dump_paths;
  std::size_t dump_count = 10;
  std::string summary;  // verify: CSV path
};

/// Executes a spec; records go to spec.output or `out`. Errors are reported
/// on `err` and mapped to exit codes.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Operation names and their accepted parameter keys.
std::vector<std::string> estimate_ops();
std::vector<std::string> op_params(const std::string& op);

int cli_main(int argc, char** argv);

}  // namespace isop
