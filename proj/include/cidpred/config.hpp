#ifndef CIDPRED_CONFIG_HPP_
#define CIDPRED_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cidpred/simulate.hpp"
#include "json.hpp"

namespace cidpred {

/// Invalid configuration; `path` names the offending field, e.g.
/// "strategy.gamma" or "checks[2].n_grid".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Family { kConvex, kStable, kDirichletBaseline };

struct StrategyConfig {
  Family family = Family::kConvex;
  WeightRule rule = DirichletLike{1.0};  // convex
  double gamma = 2.0;                    // stable
  double u = 1.0;
  Schedule schedule = GeometricSchedule{0.5};
  double c = 1.0;  // dirichlet-baseline
};

struct BaseConfig {
  bool uniform = true;
  std::vector<double> breakpoints;
  std::vector<double> densities;
};

struct PartitionConfig {
  bool dyadic = true;
  int rate = 1;
  int max_level = PartitionScheme::kMaxDyadicLevel;
  std::vector<std::vector<double>> grids;
};

struct RunConfig {
  int N = 10;
  int M = 1;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct CheckConfig {
  std::string name;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

struct OutputConfig {
  std::string dir;  // empty: --out, then CIDPRED_OUT_DIR, then "cidpred-out"
  bool trajectories = true;
  bool all_trajectories = false;
  bool ensemble = true;
};

struct ExperimentConfig {
  StrategyConfig strategy;
  BaseConfig base;
  PartitionConfig partition;
  RunConfig run;
  std::vector<CheckConfig> checks;
  OutputConfig output;
};

/// Validates every field; throws ConfigError naming the field.
ExperimentConfig parse_config(const nlohmann::ordered_json& j);

/// Full form with defaults filled in; parse_config(serialize(c)) == c.
nlohmann::ordered_json serialize(const ExperimentConfig& c);

/// Sets the dotted path (array elements by index) to `value`, parsed as JSON
/// when possible and as a string otherwise.
void apply_override(nlohmann::ordered_json& j, const std::string& assignment);

/// Parses JSON text; syntax errors carry the line and column.
nlohmann::ordered_json parse_json_text(const std::string& text, const std::string& source);

Measure build_base(const ExperimentConfig& c);
PartitionScheme build_partition(const ExperimentConfig& c);
Strategy build_strategy(const ExperimentConfig& c);

std::string family_name(Family f);

/// FNV-1a of the serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

}  // namespace cidpred

#endif  // CIDPRED_CONFIG_HPP_
