#include "cidpred/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cidpred {

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string curve_csv(const Curve& curve) {
  std::string out = "n,value,bound\n";
  for (const CurvePoint& p : curve.points) {
    out += format_number(p.n) + "," + format_number(p.value) + "," + format_number(p.bound) + "\n";
  }
  return out;
}

std::string trajectories_csv(const std::vector<Trajectory>& trajectories) {
  std::string out;
  if (trajectories.size() == 1) {
    out = "step,value\n";
    const auto& xs = trajectories.front().observations;
    for (std::size_t n = 0; n < xs.size(); ++n) {
      out += std::to_string(n + 1) + "," + format_number(xs[n]) + "\n";
    }
    return out;
  }
  out = "trajectory,step,value\n";
  for (const Trajectory& t : trajectories) {
    for (std::size_t n = 0; n < t.observations.size(); ++n) {
      out += std::to_string(t.index) + "," + std::to_string(n + 1) + "," +
             format_number(t.observations[n]) + "\n";
    }
  }
  return out;
}

std::string ensemble_csv(const EnsembleStats& stats) {
  std::string out = "step,mean,mean_sd,second_moment,second_moment_sd\n";
  for (int n = 0; n < stats.N; ++n) {
    out += std::to_string(n + 1) + "," + format_number(stats.mean[n].mean) + "," +
           format_number(stats.mean[n].sd) + "," + format_number(stats.second_moment[n].mean) +
           "," + format_number(stats.second_moment[n].sd) + "\n";
  }
  return out;
}

nlohmann::ordered_json ensemble_json(const EnsembleStats& stats) {
  nlohmann::ordered_json j;
  j["M"] = stats.M;
  j["N"] = stats.N;
  j["seed"] = stats.seed;
  auto steps = nlohmann::ordered_json::array();
  for (int n = 0; n < stats.N; ++n) {
    steps.push_back({{"step", n + 1},
                     {"mean", stats.mean[n].mean},
                     {"mean_sd", stats.mean[n].sd},
                     {"second_moment", stats.second_moment[n].mean},
                     {"second_moment_sd", stats.second_moment[n].sd}});
  }
  j["steps"] = steps;
  auto pairs = nlohmann::ordered_json::array();
  for (const PairEstimate& p : stats.pairs) {
    pairs.push_back({{"n", p.n}, {"m", p.m}, {"mean", p.product.mean}, {"sd", p.product.sd}});
  }
  j["pairs"] = pairs;
  if (!stats.f.empty()) {
    auto f = nlohmann::ordered_json::array();
    for (int n = 0; n <= stats.N; ++n) {
      double sum = 0.0;
      for (double v : stats.f_column(n)) sum += v;
      f.push_back({{"step", n}, {"mean", sum / stats.M}});
    }
    j["f"] = f;
  }
  return j;
}

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace cidpred
