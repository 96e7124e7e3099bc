#ifndef CIDPRED_CLI_HPP_
#define CIDPRED_CLI_HPP_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cidpred/config.hpp"
#include "cidpred/diagnostics.hpp"

namespace cidpred::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitParseError = 2,
  kExitIoError = 3,
};

/// Filesystem failure while reading the config or writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config file plus --set overrides, validated.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// One configured check with its parameters already validated.
struct PlannedCheck {
  std::string name;
  std::function<DiagnosticsReport()> run;
};

/// Validates every check's parameters before anything runs; throws
/// ConfigError("checks[i].key", ...).
std::vector<PlannedCheck> plan_checks(const ExperimentConfig& config);

/// Entry point used by the executable; returns the exit status.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cidpred::cli

#endif  // CIDPRED_CLI_HPP_
