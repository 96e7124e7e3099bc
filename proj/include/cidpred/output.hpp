#ifndef CIDPRED_OUTPUT_HPP_
#define CIDPRED_OUTPUT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "cidpred/diagnostics.hpp"
#include "cidpred/simulate.hpp"

namespace cidpred {

/// Shortest round-trip decimal form, '.' separator regardless of locale.
/// NaN is written as an empty field.
std::string format_number(double x);

/// n,value,bound with a header row.
std::string curve_csv(const Curve& curve);

/// step,value for one trajectory, or trajectory,step,value for several.
std::string trajectories_csv(const std::vector<Trajectory>& trajectories);

/// step,mean,mean_sd,second_moment,second_moment_sd for n = 1..N.
std::string ensemble_csv(const EnsembleStats& stats);

nlohmann::ordered_json ensemble_json(const EnsembleStats& stats);

/// Writes `text` to dir / name; throws std::runtime_error on failure.
void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text);

}  // namespace cidpred

#endif  // CIDPRED_OUTPUT_HPP_
