#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace entwb {

enum class Command { couple, bounds, compare, partition, converge, oracle };

/// One batch invocation. Input paths are checked for existence at parse
/// time; the method must be valid for the command.
struct RunConfig {
  Command command = Command::couple;
  std::string marginal_x_path;
  std::string marginal_y_path;
  std::string method;  // couple: greedy|independence|cograduation|
                       //         contrograduation|oracle|partition
                       // converge: theorem41|mincoupling
  std::string out_path;
  std::string report_path;
  std::string n_spec;        // "2..256" or "16,32,64"; sweep size for compare
  std::string family;        // converge density family
  std::vector<std::string> params;  // K=V pairs for the family
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

/// Validates the config (throws on unresolvable paths or a method invalid
/// for the command).
void validate_config(const RunConfig& cfg);

/// Runs one command. Returns 0 on success, 2 when compare finds a
/// greedy-vs-oracle gap above 1e-9, 1 is reserved for errors (the caller
/// maps exceptions to exit 1).
int run_command(const RunConfig& cfg);

/// "a..b" -> geometric ladder a, 2a, ..., b; "a,b,c" -> explicit list.
std::vector<int> parse_n_list(const std::string& spec);

}  // namespace entwb
