#include "sbdrift/config.hpp"

#include "sbdrift/rng.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sbdrift::config {

namespace {

using models::Testbed;

void check_keys(const YAML::Node& node, std::string_view where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(std::string(where) + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, std::string_view key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + std::string(key) + "'");
  }
}

template <class T>
std::vector<T> list(const YAML::Node& node, std::string_view key) {
  std::vector<T> out;
  if (node.IsSequence()) {
    for (const auto& item : node) out.push_back(scalar<T>(item, key));
  } else {
    out.push_back(scalar<T>(node, key));
  }
  if (out.empty()) throw ConfigError("'" + std::string(key) + "' must not be empty");
  return out;
}

Vec vec(const YAML::Node& node, std::string_view key) {
  const auto values = list<double>(node, key);
  if (values.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("'" + std::string(key) + "' has more than two coordinates");
  }
  Vec v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

std::vector<std::size_t> sizes(const YAML::Node& node, std::string_view key) {
  auto out = list<std::size_t>(node, key);
  for (auto m : out) {
    if (m < 1) throw ConfigError("'" + std::string(key) + "' entries must be positive");
  }
  return out;
}

nlohmann::json to_json(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

ExperimentConfig parse(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("configuration is empty");
  check_keys(root, "config",
             {"testbed", "variant", "seed", "output_dir", "threads", "interval", "query",
              "sample_sizes", "repetitions", "bandwidth", "eval_grid", "conditioning_points", "clt",
              "edge", "stress"});

  ExperimentConfig cfg;
  if (!root["testbed"]) throw ConfigError("missing required key 'testbed'");
  for (const auto& name : list<std::string>(root["testbed"], "testbed")) {
    try {
      cfg.testbeds.push_back(models::parse_testbed(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (root["variant"]) {
    try {
      cfg.variant = models::parse_variant(scalar<std::string>(root["variant"], "variant"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["output_dir"]) cfg.output_dir = scalar<std::string>(root["output_dir"], "output_dir");
  if (root["threads"]) cfg.threads = scalar<unsigned>(root["threads"], "threads");

  if (const auto n = root["interval"]) {
    check_keys(n, "interval", {"s", "u", "eta", "state_radius", "margin"});
    if (n["s"]) cfg.interval.s = scalar<double>(n["s"], "interval.s");
    if (n["u"]) cfg.interval.u = scalar<double>(n["u"], "interval.u");
    if (n["eta"]) cfg.interval.eta = scalar<double>(n["eta"], "interval.eta");
    if (n["state_radius"]) cfg.interval.state_radius = scalar<double>(n["state_radius"], "interval.state_radius");
    if (n["margin"]) cfg.interval.margin = scalar<double>(n["margin"], "interval.margin");
  }
  try {
    cfg.interval.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (const auto n = root["query"]) {
    check_keys(n, "query", {"t0", "x0", "xi0"});
    if (n["t0"]) cfg.t0 = scalar<double>(n["t0"], "query.t0");
    if (n["x0"]) cfg.x0 = vec(n["x0"], "query.x0");
    if (n["xi0"]) cfg.xi0 = vec(n["xi0"], "query.xi0");
  }
  if (root["sample_sizes"]) cfg.sample_sizes = sizes(root["sample_sizes"], "sample_sizes");
  if (root["repetitions"]) cfg.repetitions = scalar<std::size_t>(root["repetitions"], "repetitions");

  if (const auto n = root["bandwidth"]) {
    check_keys(n, "bandwidth", {"h0", "ratio", "kappa_pair", "kappa_final"});
    if (n["h0"]) cfg.bandwidth.h0 = scalar<double>(n["h0"], "bandwidth.h0");
    if (n["ratio"]) cfg.bandwidth.ratio = scalar<double>(n["ratio"], "bandwidth.ratio");
    if (n["kappa_pair"]) cfg.bandwidth.kappa_pair = scalar<double>(n["kappa_pair"], "bandwidth.kappa_pair");
    if (n["kappa_final"]) cfg.bandwidth.kappa_final = scalar<double>(n["kappa_final"], "bandwidth.kappa_final");
  }
  if (const auto n = root["eval_grid"]) {
    check_keys(n, "eval_grid", {"lower", "upper", "points"});
    GridSpec g;
    if (n["lower"]) g.lower = scalar<double>(n["lower"], "eval_grid.lower");
    if (n["upper"]) g.upper = scalar<double>(n["upper"], "eval_grid.upper");
    if (n["points"]) g.points = scalar<int>(n["points"], "eval_grid.points");
    if (!(g.lower < g.upper) || g.points < 2) throw ConfigError("eval_grid needs lower < upper and points >= 2");
    cfg.eval_grid = g;
  }
  if (root["conditioning_points"]) {
    cfg.conditioning_points = scalar<int>(root["conditioning_points"], "conditioning_points");
    if (cfg.conditioning_points < 1) throw ConfigError("conditioning_points must be positive");
  }
  if (const auto n = root["clt"]) {
    check_keys(n, "clt", {"alpha", "c", "sample_sizes", "repetitions"});
    if (n["alpha"]) cfg.clt.alpha = scalar<double>(n["alpha"], "clt.alpha");
    if (n["c"]) cfg.clt.c = scalar<double>(n["c"], "clt.c");
    if (n["sample_sizes"]) cfg.clt.sample_sizes = sizes(n["sample_sizes"], "clt.sample_sizes");
    if (n["repetitions"]) cfg.clt.repetitions = scalar<std::size_t>(n["repetitions"], "clt.repetitions");
  }
  if (const auto n = root["edge"]) {
    check_keys(n, "edge", {"sample_size", "repetitions", "offsets"});
    if (n["sample_size"]) cfg.edge.sample_size = scalar<std::size_t>(n["sample_size"], "edge.sample_size");
    if (n["repetitions"]) cfg.edge.repetitions = scalar<std::size_t>(n["repetitions"], "edge.repetitions");
    if (n["offsets"]) cfg.edge.offsets = list<double>(n["offsets"], "edge.offsets");
  }
  if (const auto n = root["stress"]) {
    check_keys(n, "stress", {"sample_size", "repetitions"});
    if (n["sample_size"]) cfg.stress.sample_size = scalar<std::size_t>(n["sample_size"], "stress.sample_size");
    if (n["repetitions"]) cfg.stress.repetitions = scalar<std::size_t>(n["repetitions"], "stress.repetitions");
  }
  return cfg;
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

QueryPoint default_query(Testbed testbed) {
  switch (testbed) {
    case Testbed::GG1: return {0.6, scalar_vec(0.2), scalar_vec(0.0)};
    case Testbed::GG2: return {0.6, make_vec({0.0, 0.0}), make_vec({0.0, 0.0})};
    case Testbed::MM1: return {0.6, scalar_vec(0.3), scalar_vec(0.8)};
    case Testbed::MM2: return {0.6, make_vec({0.0, 0.0}), make_vec({0.8, -0.8})};
  }
  throw std::invalid_argument("unknown testbed");
}

std::size_t default_repetitions(Testbed testbed) {
  return models::dimension_of(testbed) == 1 ? 25 : 10;
}

double default_clt_alpha(Testbed testbed) { return testbed == Testbed::MM1 ? 0.28 : 0.22; }

GridSpec default_eval_grid(int dim) {
  return dim == 1 ? GridSpec{-2.0, 2.0, 200} : GridSpec{-1.5, 1.5, 21};
}

QueryPoint resolve_query(const ExperimentConfig& cfg, Testbed testbed) {
  QueryPoint q = default_query(testbed);
  const int d = models::dimension_of(testbed);
  if (cfg.t0) q.t0 = *cfg.t0;
  if (cfg.x0) q.x0 = *cfg.x0;
  if (cfg.xi0) q.xi0 = *cfg.xi0;
  if (q.x0.size() != d || q.xi0.size() != d) {
    throw ConfigError("query point dimension does not match testbed " + models::to_string(testbed));
  }
  if (!(q.t0 >= cfg.interval.s && q.t0 <= cfg.interval.u - cfg.interval.eta)) {
    throw ConfigError("query time must lie in [s, u - eta]");
  }
  return q;
}

GridSpec resolve_eval_grid(const ExperimentConfig& cfg, int dim) {
  return cfg.eval_grid ? *cfg.eval_grid : default_eval_grid(dim);
}

std::size_t resolve_repetitions(const ExperimentConfig& cfg, Testbed testbed) {
  return cfg.repetitions ? *cfg.repetitions : default_repetitions(testbed);
}

std::string canonical_text(const ExperimentConfig& cfg) {
  nlohmann::json j;
  for (auto t : cfg.testbeds) j["testbed"].push_back(models::to_string(t));
  j["variant"] = models::to_string(cfg.variant);
  j["seed"] = cfg.seed;
  j["interval"] = {{"s", cfg.interval.s}, {"u", cfg.interval.u}, {"eta", cfg.interval.eta},
                   {"state_radius", cfg.interval.state_radius}, {"margin", cfg.interval.margin}};
  if (cfg.t0) j["query"]["t0"] = *cfg.t0;
  if (cfg.x0) j["query"]["x0"] = to_json(*cfg.x0);
  if (cfg.xi0) j["query"]["xi0"] = to_json(*cfg.xi0);
  j["sample_sizes"] = cfg.sample_sizes;
  if (cfg.repetitions) j["repetitions"] = *cfg.repetitions;
  j["bandwidth"] = {{"h0", cfg.bandwidth.h0}, {"ratio", cfg.bandwidth.ratio},
                    {"kappa_pair", cfg.bandwidth.kappa_pair}, {"kappa_final", cfg.bandwidth.kappa_final}};
  if (cfg.eval_grid) {
    j["eval_grid"] = {{"lower", cfg.eval_grid->lower}, {"upper", cfg.eval_grid->upper},
                      {"points", cfg.eval_grid->points}};
  }
  j["conditioning_points"] = cfg.conditioning_points;
  j["clt"] = {{"c", cfg.clt.c}, {"sample_sizes", cfg.clt.sample_sizes}, {"repetitions", cfg.clt.repetitions}};
  if (cfg.clt.alpha) j["clt"]["alpha"] = *cfg.clt.alpha;
  j["edge"] = {{"sample_size", cfg.edge.sample_size}, {"repetitions", cfg.edge.repetitions},
               {"offsets", cfg.edge.offsets}};
  j["stress"] = {{"sample_size", cfg.stress.sample_size}, {"repetitions", cfg.stress.repetitions}};
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(rng::fnv1a(canonical_text(cfg))));
  return buf;
}

}  // namespace sbdrift::config
