#include <fstream>
#include <iostream>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "kacrice/errors.hpp"

namespace {

using kacrice::cli::KeyValues;

constexpr const char* kFooter = R"(Settings precedence: flags > --config file (key = value lines) > defaults.
Exit codes: 0 success, 1 numerical failure, 2 usage error.
JSON output carries "schema": 1. CSV columns (RFC 4180):
  gamma        kind,index,value,error,tail_bound,tail_estimate,monte_carlo
  kac-density  quantity,value,error
  simulate     path,count
  clt-check    section,p,value,std_error,target,deviation,flagged
  selftest     suite,check,status,measured,lower,upper,seconds)";

struct Flag {
  std::string key;
  CLI::Option* option = nullptr;
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::vector<Flag> flags;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cumulants of zeros of Gaussian processes: Kac densities, limiting constants, Monte Carlo checks"};
  app.footer(kFooter);
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::string config_path;
  bool inject_failure = false;

  const std::vector<std::pair<std::string, std::string>> common{
      {"seed", "Master random seed"},
      {"out", "Output file (default: standard output)"},
      {"format", "Output format: json or csv"},
      {"workers", "Worker threads (0: all cores)"},
      {"model", "sinc | cosine | trig_poly | trig_poly_ar1"},
      {"n", "Degree parameter of trigonometric models"},
      {"scale", "Sinc scale or cosine frequency"},
      {"ar1", "Coefficient correlation a for trig_poly_ar1"},
      {"eta", "Cluster radius"},
      {"mc-samples", "Monte Carlo samples per absolute moment"}};
  const std::vector<std::pair<std::string, std::string>> quadrature{
      {"p", "Highest cumulant order (<= 4)"},
      {"truncation", "Truncation radius T for the pair integral"},
      {"truncation-high", "Truncation radius for k >= 3"},
      {"order", "Gauss-Legendre points per unit panel"},
      {"mc-points", "Integrand samples for k = 4"}};
  const std::vector<std::pair<std::string, std::string>> simulation{
      {"paths", "Number of sample paths"},
      {"window", "Observation window R for stationary models"},
      {"grid-step", "Zero-scan grid step"},
      {"refine-tol", "Zero refinement tolerance"},
      {"lag-accuracy", "Spectral bin width times window"},
      {"batches", "Jackknife batches"}};

  std::vector<Subcommand> subs;
  const auto add = [&](const std::string& name, const std::string& help,
                       std::initializer_list<const std::vector<std::pair<std::string, std::string>>*> groups) {
    Subcommand s;
    s.app = app.add_subcommand(name, help);
    s.app->add_option("--config", config_path, "Flat key = value configuration file");
    for (const auto* group : groups) {
      for (const auto& [key, text] : *group) {
        s.flags.push_back({key, s.app->add_option("--" + key, values[key], text)});
      }
    }
    subs.push_back(s);
    return subs.back().app;
  };
  add("gamma", "Limiting cumulant constants gamma_1..gamma_p", {&common, &quadrature});
  CLI::App* kac = add("kac-density", "Kac density and cumulant Kac density at given nodes", {&common});
  subs.back().flags.push_back({"nodes", kac->add_option("--nodes", values["nodes"], "Comma-separated node list")});
  add("simulate", "Zero counts of sampled paths", {&common, &simulation});
  add("clt-check", "Monte Carlo cumulants and normalized moments against Gaussian targets",
      {&common, &simulation, &quadrature});
  CLI::App* self = add("selftest", "Invariant suites", {&common});
  self->add_flag("--inject-failure", inject_failure, "Append a suite that always fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  int exit_code = 0;
  try {
    const Subcommand* chosen = nullptr;
    for (const auto& s : subs) {
      if (s.app->parsed()) chosen = &s;
    }
    KeyValues flags;
    for (const auto& f : chosen->flags) {
      if (f.option->count() > 0) flags[f.key] = values[f.key];
    }
    if (inject_failure) flags["inject_failure"] = "true";
    KeyValues file;
    if (!config_path.empty()) file = kacrice::cli::read_config_file(config_path);
    const auto config = kacrice::cli::build_config(chosen->app->get_name(), {file, flags});
    const auto report = kacrice::cli::run_command(config);
    const std::string text = kacrice::cli::render(report, config.format);
    if (config.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(config.out, std::ios::binary);
      if (!out) throw kacrice::cli::UsageError("cannot write " + config.out);
      out << text;
    }
    exit_code = report.exit_code;
  } catch (const kacrice::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const kacrice::ContractError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const kacrice::ModelError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
