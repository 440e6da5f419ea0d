#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace kacrice::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "model",      "n",          "scale",       "ar1",      "p",       "truncation", "truncation_high",
      "order",      "eta",        "mc_samples",  "mc_points", "paths",  "grid_step",  "refine_tol",
      "window",     "lag_accuracy", "batches",   "seed",     "workers", "nodes",      "out",
      "format",     "inject_failure"};
  return keys;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("invalid number for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw UsageError("invalid integer for " + key + ": '" + v + "'");
  return x;
}

template <class T>
void require_positive(const std::string& key, T value) {
  if (!(value > 0)) throw UsageError(key + " must be positive");
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    if (!known_keys().count(key)) throw UsageError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

RunConfig build_config(const std::string& command, const std::vector<KeyValues>& layers) {
  KeyValues merged;
  for (const auto& layer : layers) {
    for (const auto& [k, v] : layer) merged[normalize_key(k)] = v;
  }
  RunConfig c;
  c.command = command;
  for (const auto& [key, v] : merged) {
    if (!known_keys().count(key)) throw UsageError("unknown setting '" + key + "'");
    if (key == "model") c.model = v;
    else if (key == "n") c.n = static_cast<int>(to_long(key, v));
    else if (key == "scale") c.scale = to_double(key, v);
    else if (key == "ar1") c.ar1 = to_double(key, v);
    else if (key == "p") c.p = static_cast<int>(to_long(key, v));
    else if (key == "truncation") c.truncation = to_double(key, v);
    else if (key == "truncation_high") c.truncation_high = to_double(key, v);
    else if (key == "order") c.order = static_cast<int>(to_long(key, v));
    else if (key == "eta") c.eta = to_double(key, v);
    else if (key == "mc_samples") c.mc_samples = to_long(key, v);
    else if (key == "mc_points") c.mc_points = to_long(key, v);
    else if (key == "paths") c.paths = to_long(key, v);
    else if (key == "grid_step") c.grid_step = to_double(key, v);
    else if (key == "refine_tol") c.refine_tol = to_double(key, v);
    else if (key == "window") c.window = to_double(key, v);
    else if (key == "lag_accuracy") c.lag_accuracy = to_double(key, v);
    else if (key == "batches") c.batches = static_cast<int>(to_long(key, v));
    else if (key == "seed") {
      const long s = to_long(key, v);
      if (s < 0) throw UsageError("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "workers") c.workers = static_cast<int>(to_long(key, v));
    else if (key == "nodes") {
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) c.nodes.push_back(to_double(key, trim(item)));
    } else if (key == "out") c.out = v;
    else if (key == "format") c.format = v;
    else if (key == "inject_failure") c.inject_failure = v == "1" || v == "true";
  }

  require_positive("n", c.n);
  require_positive("scale", c.scale);
  require_positive("p", c.p);
  require_positive("truncation", c.truncation);
  require_positive("truncation_high", c.truncation_high);
  require_positive("order", c.order);
  require_positive("eta", c.eta);
  require_positive("mc_samples", c.mc_samples);
  require_positive("mc_points", c.mc_points);
  require_positive("paths", c.paths);
  require_positive("grid_step", c.grid_step);
  require_positive("refine_tol", c.refine_tol);
  require_positive("window", c.window);
  require_positive("lag_accuracy", c.lag_accuracy);
  require_positive("batches", c.batches);
  if (c.workers < 0) throw UsageError("workers must be non-negative (0 selects all cores)");
  if (c.format != "json" && c.format != "csv") throw UsageError("format must be json or csv");
  if (!(c.ar1 > -1.0 && c.ar1 < 1.0)) throw UsageError("ar1 must lie in (-1, 1)");
  if ((command == "simulate" || command == "clt-check") && !c.seed) {
    throw UsageError(command + " requires --seed (or seed in the config file)");
  }
  if (command == "kac-density" && c.nodes.empty()) throw UsageError("kac-density requires --nodes");
  if (command == "gamma" && c.p > 4) throw UsageError("gamma supports p <= 4");
  make_model(c);
  return c;
}

CovarianceModel make_model(const RunConfig& c) {
  if (c.model == "sinc") return CovarianceModel::sinc(c.scale);
  if (c.model == "cosine") return CovarianceModel::cosine(c.scale);
  if (c.model == "trig_poly") return CovarianceModel::trig_poly(c.n);
  if (c.model == "trig_poly_ar1") return CovarianceModel::trig_poly_ar1(c.n, c.ar1);
  throw UsageError("unknown model '" + c.model + "' (expected sinc, cosine, trig_poly or trig_poly_ar1)");
}

bool is_trig_family(const RunConfig& c) { return c.model == "trig_poly" || c.model == "trig_poly_ar1"; }

}  // namespace kacrice::cli
