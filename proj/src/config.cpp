#include "cidpred/config.hpp"

#include <cstdio>
#include <algorithm>
#include <cmath>
#include <set>

#include "cidpred/diagnostics.hpp"

namespace cidpred {
namespace {

using Json = nlohmann::ordered_json;

// Reads the fields of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()) &&
        std::abs(v.get<double>()) < 9e15) {
      return static_cast<long long>(v.get<double>());
    }
    throw ConfigError(at(key), "expected an integer");
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
    throw ConfigError(at(key), "expected a non-negative integer");
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) throw ConfigError(at(key), "required");
    return number_list(j_.at(key), at(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (used_.count(key) == 0) throw ConfigError(at(key), "unknown field");
    }
  }

  static std::vector<double> number_list(const Json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

RateSequence parse_rate(Fields& parent, const std::string& key, RateSequence fallback) {
  if (!parent.has(key)) return fallback;
  Fields f(parent.raw(key), parent.at(key));
  RateSequence r;
  r.limit = f.number("limit", fallback.limit);
  r.scale = f.number("scale", fallback.scale);
  r.ratio = f.number("ratio", fallback.ratio);
  f.finish();
  return r;
}

WeightRule parse_rule(Fields& parent) {
  if (!parent.has("rule")) return DirichletLike{1.0};
  Fields f(parent.raw("rule"), parent.at("rule"));
  const std::string kind = f.string("kind", "dirichlet");
  WeightRule rule;
  if (kind == "dirichlet") {
    rule = DirichletLike{f.number("c", 1.0)};
  } else if (kind == "smoothing") {
    rule = ExpSmoothing{f.number("q", 0.5)};
  } else if (kind == "reinforcement") {
    Reinforcement r;
    const std::string crit = f.string("criterion", "mean_error");
    if (crit == "mean_error") {
      r.criterion = Criterion::kMeanError;
    } else if (crit == "avg_pred_error") {
      r.criterion = Criterion::kAvgPredError;
    } else if (crit == "ks_band") {
      r.criterion = Criterion::kKsBand;
    } else {
      throw ConfigError(f.at("criterion"),
                        "expected mean_error, avg_pred_error or ks_band, got \"" + crit + "\"");
    }
    r.epsilon = f.number("epsilon", r.epsilon);
    r.q0 = f.number("q0", r.q0);
    r.a = parse_rate(f, "a", r.a);
    r.b = parse_rate(f, "b", r.b);
    rule = r;
  } else {
    throw ConfigError(f.at("kind"),
                      "expected dirichlet, smoothing or reinforcement, got \"" + kind + "\"");
  }
  f.finish();
  try {
    validate(rule);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(parent.at("rule"), e.what());
  }
  return rule;
}

Schedule parse_schedule(Fields& parent) {
  if (!parent.has("schedule")) return GeometricSchedule{0.5};
  Fields f(parent.raw("schedule"), parent.at("schedule"));
  const std::string kind = f.string("kind", "geometric");
  Schedule s;
  if (kind == "geometric") {
    const double q = f.number("q", 0.5);
    if (!(q > 0.0 && q < 1.0)) throw ConfigError(f.at("q"), "must be in (0, 1), got " + fmt(q));
    s = GeometricSchedule{q};
  } else if (kind == "explicit") {
    s = ExplicitSchedule{f.numbers("u_values")};
  } else {
    throw ConfigError(f.at("kind"), "expected geometric or explicit, got \"" + kind + "\"");
  }
  f.finish();
  return s;
}

StrategyConfig parse_strategy(Fields& root) {
  StrategyConfig s;
  if (!root.has("strategy")) return s;
  Fields f(root.raw("strategy"), "strategy");
  const std::string family = f.string("family", "convex");
  if (family == "convex") {
    s.family = Family::kConvex;
    s.rule = parse_rule(f);
  } else if (family == "stable") {
    s.family = Family::kStable;
    s.gamma = f.number("gamma", 2.0);
    if (!(s.gamma > 0.0 && s.gamma <= 2.0)) {
      throw ConfigError("strategy.gamma", "must be in (0, 2], got " + fmt(s.gamma));
    }
    s.u = f.number("u", 1.0);
    if (!(s.u > 0.0)) throw ConfigError("strategy.u", "must be > 0, got " + fmt(s.u));
    s.schedule = parse_schedule(f);
  } else if (family == "dirichlet-baseline") {
    s.family = Family::kDirichletBaseline;
    s.c = f.number("c", 1.0);
    if (!(s.c > 0.0)) throw ConfigError("strategy.c", "must be > 0, got " + fmt(s.c));
  } else {
    throw ConfigError("strategy.family",
                      "expected convex, stable or dirichlet-baseline, got \"" + family + "\"");
  }
  f.finish();
  return s;
}

BaseConfig parse_base(Fields& root) {
  BaseConfig b;
  if (!root.has("base")) return b;
  Fields f(root.raw("base"), "base");
  const std::string kind = f.string("kind", "uniform");
  if (kind == "uniform") {
    b.uniform = true;
  } else if (kind == "piecewise") {
    b.uniform = false;
    b.breakpoints = f.numbers("breakpoints");
    b.densities = f.numbers("densities");
  } else {
    throw ConfigError("base.kind", "expected uniform or piecewise, got \"" + kind + "\"");
  }
  f.finish();
  return b;
}

PartitionConfig parse_partition(Fields& root) {
  PartitionConfig p;
  if (!root.has("partition")) return p;
  Fields f(root.raw("partition"), "partition");
  const std::string kind = f.string("kind", "dyadic");
  if (kind == "dyadic") {
    p.dyadic = true;
    p.rate = static_cast<int>(f.integer("rate", 1));
    if (p.rate < 1) throw ConfigError("partition.rate", "must be >= 1");
    p.max_level = static_cast<int>(f.integer("max_level", PartitionScheme::kMaxDyadicLevel));
    if (p.max_level < 0 || p.max_level > PartitionScheme::kMaxDyadicLevel) {
      throw ConfigError("partition.max_level", "must be in [0, 52]");
    }
  } else if (kind == "explicit") {
    p.dyadic = false;
    if (!f.has("grids") || !f.raw("grids").is_array()) {
      throw ConfigError("partition.grids", "expected an array of breakpoint arrays");
    }
    const Json& grids = f.raw("grids");
    for (std::size_t i = 0; i < grids.size(); ++i) {
      p.grids.push_back(Fields::number_list(grids[i], "partition.grids[" + std::to_string(i) + "]"));
    }
  } else {
    throw ConfigError("partition.kind", "expected dyadic or explicit, got \"" + kind + "\"");
  }
  f.finish();
  return p;
}

RunConfig parse_run(Fields& root) {
  RunConfig r;
  if (!root.has("run")) return r;
  Fields f(root.raw("run"), "run");
  const long long n = f.integer("N", r.N);
  if (n < 1 || n > 100000000) throw ConfigError("run.N", "must be in [1, 1e8]");
  const long long m = f.integer("M", r.M);
  if (m < 1 || m > 100000000) throw ConfigError("run.M", "must be in [1, 1e8]");
  r.N = static_cast<int>(n);
  r.M = static_cast<int>(m);
  r.seed = f.unsigned64("seed", 0);
  const long long t = f.integer("threads", 0);
  if (t < 0 || t > 4096) throw ConfigError("run.threads", "must be in [0, 4096]");
  r.threads = static_cast<int>(t);
  f.finish();
  return r;
}

std::vector<CheckConfig> parse_checks(Fields& root) {
  std::vector<CheckConfig> out;
  if (!root.has("checks")) return out;
  const Json& list = root.raw("checks");
  if (!list.is_array()) throw ConfigError("checks", "expected an array");
  const auto& catalog = check_catalog();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "checks[" + std::to_string(i) + "]";
    const Json& item = list[i];
    if (!item.is_object()) throw ConfigError(path, "expected an object");
    if (!item.contains("name") || !item["name"].is_string()) {
      throw ConfigError(path + ".name", "required string");
    }
    CheckConfig c;
    c.name = item["name"].get<std::string>();
    auto info = std::find_if(catalog.begin(), catalog.end(),
                             [&](const CheckInfo& k) { return k.name == c.name; });
    if (info == catalog.end()) {
      throw ConfigError(path + ".name", "unknown check \"" + c.name + "\" (see list-checks)");
    }
    for (const auto& [key, value] : item.items()) {
      if (key == "name") continue;
      const bool known = key == "seed" ||
                         std::any_of(info->parameters.begin(), info->parameters.end(),
                                     [&](const auto& p) { return p.first == key; });
      if (!known) throw ConfigError(path + "." + key, "unknown parameter for " + c.name);
      c.params[key] = value;
    }
    out.push_back(std::move(c));
  }
  return out;
}

OutputConfig parse_output(Fields& root) {
  OutputConfig o;
  if (!root.has("output")) return o;
  Fields f(root.raw("output"), "output");
  o.dir = f.string("dir", "");
  o.trajectories = f.boolean("trajectories", true);
  o.all_trajectories = f.boolean("all_trajectories", false);
  o.ensemble = f.boolean("ensemble", true);
  f.finish();
  return o;
}

Json rate_json(const RateSequence& r) {
  return Json{{"limit", r.limit}, {"scale", r.scale}, {"ratio", r.ratio}};
}

}  // namespace

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

std::string family_name(Family f) {
  switch (f) {
    case Family::kConvex:
      return "convex";
    case Family::kStable:
      return "stable";
    case Family::kDirichletBaseline:
      return "dirichlet-baseline";
  }
  return "unknown";
}

ExperimentConfig parse_config(const Json& j) {
  Fields root(j, "");
  ExperimentConfig c;
  c.strategy = parse_strategy(root);
  c.base = parse_base(root);
  c.partition = parse_partition(root);
  c.run = parse_run(root);
  c.checks = parse_checks(root);
  c.output = parse_output(root);
  root.finish();
  // Cross-field validation happens by building the objects once.
  try {
    (void)build_base(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("base", e.what());
  }
  try {
    (void)build_partition(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("partition", e.what());
  }
  try {
    (void)build_strategy(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("strategy", e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError("partition", e.what());
  }
  return c;
}

Json serialize(const ExperimentConfig& c) {
  Json j;
  Json s;
  s["family"] = family_name(c.strategy.family);
  switch (c.strategy.family) {
    case Family::kConvex: {
      Json rule;
      if (const auto* d = std::get_if<DirichletLike>(&c.strategy.rule)) {
        rule = Json{{"kind", "dirichlet"}, {"c", d->c}};
      } else if (const auto* e = std::get_if<ExpSmoothing>(&c.strategy.rule)) {
        rule = Json{{"kind", "smoothing"}, {"q", e->q}};
      } else {
        const auto& r = std::get<Reinforcement>(c.strategy.rule);
        rule = Json{{"kind", "reinforcement"},
                    {"criterion", criterion_name(r.criterion)},
                    {"epsilon", r.epsilon},
                    {"q0", r.q0},
                    {"a", rate_json(r.a)},
                    {"b", rate_json(r.b)}};
      }
      s["rule"] = rule;
      break;
    }
    case Family::kStable: {
      s["gamma"] = c.strategy.gamma;
      s["u"] = c.strategy.u;
      if (const auto* g = std::get_if<GeometricSchedule>(&c.strategy.schedule)) {
        s["schedule"] = Json{{"kind", "geometric"}, {"q", g->q}};
      } else {
        s["schedule"] = Json{{"kind", "explicit"},
                             {"u_values", std::get<ExplicitSchedule>(c.strategy.schedule).u_values}};
      }
      break;
    }
    case Family::kDirichletBaseline:
      s["c"] = c.strategy.c;
      break;
  }
  j["strategy"] = s;
  if (c.base.uniform) {
    j["base"] = Json{{"kind", "uniform"}};
  } else {
    j["base"] = Json{{"kind", "piecewise"},
                     {"breakpoints", c.base.breakpoints},
                     {"densities", c.base.densities}};
  }
  if (c.partition.dyadic) {
    j["partition"] = Json{{"kind", "dyadic"}, {"rate", c.partition.rate},
                          {"max_level", c.partition.max_level}};
  } else {
    j["partition"] = Json{{"kind", "explicit"}, {"grids", c.partition.grids}};
  }
  j["run"] = Json{{"N", c.run.N}, {"M", c.run.M}, {"seed", c.run.seed},
                  {"threads", c.run.threads}};
  Json checks = Json::array();
  for (const CheckConfig& chk : c.checks) {
    Json item{{"name", chk.name}};
    for (const auto& [k, v] : chk.params.items()) item[k] = v;
    checks.push_back(item);
  }
  j["checks"] = checks;
  j["output"] = Json{{"dir", c.output.dir},
                     {"trajectories", c.output.trajectories},
                     {"all_trajectories", c.output.all_trajectories},
                     {"ensemble", c.output.ensemble}};
  return j;
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty path segment");
    const bool last = dot == std::string::npos;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError(path, "expected an array index at \"" + key + "\"");
      }
      if (idx >= node->size()) throw ConfigError(path, "array index out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) throw ConfigError(path, "\"" + key + "\" is not inside an object");
      node = &(*node)[key];
    }
    if (last) break;
    start = dot + 1;
  }
  *node = value;
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source, e.what());
  }
}

Measure build_base(const ExperimentConfig& c) {
  if (c.base.uniform) return Measure::uniform();
  return Measure::piecewise(c.base.breakpoints, c.base.densities);
}

PartitionScheme build_partition(const ExperimentConfig& c) {
  if (c.partition.dyadic) return PartitionScheme::dyadic(c.partition.rate, c.partition.max_level);
  return PartitionScheme::explicit_grids(c.partition.grids);
}

Strategy build_strategy(const ExperimentConfig& c) {
  switch (c.strategy.family) {
    case Family::kConvex:
      return ConvexStrategy(build_base(c), build_partition(c), c.strategy.rule);
    case Family::kStable:
      return StableStrategy(c.strategy.gamma, c.strategy.u, c.strategy.schedule);
    case Family::kDirichletBaseline:
      return DirichletBaseline(c.strategy.c, build_base(c));
  }
  throw std::logic_error("unreachable");
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string text = serialize(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cidpred
