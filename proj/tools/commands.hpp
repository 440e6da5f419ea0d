#pragma once

// Subcommands of the command-line tool. Each returns structured data rendered
// as JSON or RFC 4180 CSV by the caller.

#include <string>
#include <vector>

#include "json.hpp"
#include "run_config.hpp"

namespace kacrice::cli {

struct Report {
  nlohmann::ordered_json json;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  int exit_code = 0;
};

inline constexpr int kSchemaVersion = 1;

Report cmd_gamma(const RunConfig& config);
Report cmd_kac_density(const RunConfig& config);
Report cmd_simulate(const RunConfig& config);
Report cmd_clt_check(const RunConfig& config);
Report cmd_selftest(const RunConfig& config);

Report run_command(const RunConfig& config);

std::string render(const Report& report, const std::string& format);

std::string csv_field(const std::string& field);
std::string number(double x);

}  // namespace kacrice::cli
