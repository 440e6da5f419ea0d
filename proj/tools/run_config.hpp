#pragma once

// Run configuration for the command-line tool: flat key=value files, flag
// overrides, validation, and model construction.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kacrice/gaussian.hpp"

namespace kacrice::cli {

// Malformed command line or configuration; exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::string model = "sinc";
  int n = 50;
  double scale = 1.0;     // sinc scale or cosine frequency
  double ar1 = 0.5;       // coefficient correlation a^{|k|} for trig_poly_ar1
  int p = 2;
  double truncation = 40.0;
  double truncation_high = 20.0;
  int order = 10;
  double eta = 0.25;
  long mc_samples = 20000;
  long mc_points = 4000;
  long paths = 2000;
  double grid_step = 0.1;
  double refine_tol = 1e-10;
  double window = 200.0;
  double lag_accuracy = 0.1;
  int batches = 20;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::vector<double> nodes;
  std::string out;
  std::string format = "json";
  bool inject_failure = false;
};

using KeyValues = std::map<std::string, std::string>;

// Lines `key = value`; '#' starts a comment; dashes in keys are read as underscores.
KeyValues parse_config_text(const std::string& text);
KeyValues read_config_file(const std::string& path);

// Later maps override earlier ones.
RunConfig build_config(const std::string& command, const std::vector<KeyValues>& layers);

CovarianceModel make_model(const RunConfig& config);

bool is_trig_family(const RunConfig& config);

}  // namespace kacrice::cli
