#include "app/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace geosched::app {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> table = {
      {"run.seed", "0"},
      {"target.kind", "bimodal"},
      {"target.separation", "6"},
      {"target.std", "0.1"},
      {"target.level", "3"},
      {"target.mollify_t", "1e-05"},
      {"target.mean", "0"},
      {"target.variance", "0.01"},
      {"target.dim", "1"},
      {"noise.family", "vp_linear"},
      {"noise.beta_min", "0.1"},
      {"noise.beta_max", "20"},
      {"noise.epsilon", "0.008"},
      {"noise.sigma_min", "0.002"},
      {"noise.sigma_max", "80"},
      {"noise.t_min", "1e-05"},
      {"schedule.kind", "uniform"},
      {"schedule.steps", "50"},
      {"schedule.rho", "7"},
      {"schedule.file", ""},
      {"score.source", "oracle"},
      {"score.checkpoint", ""},
      {"cost.estimator", "corrector"},
      {"cost.velocity_at", "source"},
      {"cost.interpolation", "cubic"},
      {"cost.samples", "4096"},
      {"cost.probes", "5"},
      {"optimize.max_iters", "100"},
      {"optimize.tolerance", "0.0001"},
      {"optimize.gamma", "0.5"},
      {"train.iterations", "5000"},
      {"train.batch", "256"},
      {"train.learning_rate", "0.001"},
      {"train.grad_steps", "1"},
      {"train.gamma", "0.1"},
      {"train.checkpoint_every", "500"},
      {"train.diagnostic_samples", "256"},
      {"train.eval_samples", "4000"},
      {"train.width", "128"},
      {"train.depth", "5"},
      {"train.embed", "12"},
      {"train.fourier_scale", "4"},
      {"train.log_time", "true"},
      {"train.resume", ""},
      {"sample.sampler", "reverse_sde"},
      {"sample.n", "10000"},
      {"sample.n_inner", "1"},
      {"sample.step_scale", "0.1"},
      {"eval.samples_file", ""},
      {"eval.probe_lo", "0.001"},
      {"eval.probe_count", "12"},
      {"eval.probe_points", "256"},
      {"sweep.steps", "10,20,50,100"},
      {"sweep.baseline", "uniform"},
  };
  return table;
}

const std::map<std::string, std::map<std::string, std::string>>& preset_table() {
  static const std::map<std::string, std::map<std::string, std::string>> table = {
      {"bimodal", {{"target.kind", "bimodal"}, {"train.gamma", "0.1"}, {"train.iterations", "5000"}}},
      {"cantor",
       {{"target.kind", "cantor"},
        {"target.level", "3"},
        {"train.gamma", "0.01"},
        {"train.iterations", "20000"},
        {"sample.n", "20000"}}},
      {"gaussian-geodesic",
       {{"target.kind", "gaussian"}, {"target.mean", "0"}, {"target.variance", "0.01"}, {"cost.samples", "4096"}}},
      {"t-sweep", {{"target.kind", "bimodal"}, {"sweep.steps", "10,20,30,50,100"}}},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.values_ = default_values();
  return c;
}

const std::vector<std::string>& Config::preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : preset_table()) out.push_back(name);
    return out;
  }();
  return names;
}

void Config::apply_preset(const std::string& name) {
  const auto it = preset_table().find(name);
  if (it == preset_table().end()) throw ConfigError(fmt::format("unknown preset '{}'", name));
  for (const auto& [k, v] : it->second) set(k, v);
}

void Config::merge_ini(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("cannot read config: {}", e.what()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(fmt::format("{}: key '{}' outside a [section]", path.string(), section));
    for (const auto& [key, value] : body) set(section + "." + key, trim(value.data()));
  }
}

void Config::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  it->second = value;
}

const std::string& Config::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  return it->second;
}

double Config::real(const std::string& key) const {
  const std::string& s = str(key);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(fmt::format("{} = '{}' is not a number", key, s));
  return v;
}

long Config::integer(const std::string& key) const {
  const std::string& s = str(key);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(fmt::format("{} = '{}' is not an integer", key, s));
  return v;
}

bool Config::boolean(const std::string& key) const {
  std::string s = str(key);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{} = '{}' is not a boolean", key, s));
}

std::vector<long> Config::integer_list(const std::string& key) const {
  std::vector<long> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty())
      throw ConfigError(fmt::format("{}: '{}' is not an integer", key, item));
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(fmt::format("{} is empty", key));
  return out;
}

std::string Config::to_ini() const {
  std::string out;
  std::string section;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out += '\n';
      out += fmt::format("[{}]\n", s);
      section = s;
    }
    out += fmt::format("{} = {}\n", key.substr(dot + 1), value);
  }
  return out;
}

}  // namespace geosched::app
