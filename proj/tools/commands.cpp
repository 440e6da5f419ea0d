#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "kacrice/asymptotics.hpp"
#include "kacrice/errors.hpp"
#include "kacrice/estimate.hpp"
#include "kacrice/kac.hpp"
#include "kacrice/selfcheck.hpp"

namespace kacrice::cli {

namespace {

using ojson = nlohmann::ordered_json;

ojson header(const RunConfig& c) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["command"] = c.command;
  j["model"] = make_model(c).name();
  return j;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

GammaOptions gamma_options(const RunConfig& c) {
  GammaOptions o;
  o.truncation = c.truncation;
  o.truncation_high = c.truncation_high;
  o.order = c.order;
  o.eta = c.eta;
  o.workers = c.workers;
  o.mc_points = c.mc_points;
  o.mc_samples = c.mc_samples;
  o.seed = c.seed.value_or(1);
  return o;
}

// Zero counts per unit of the model's length parameter, and the factor
// converting gamma_p (per unit length of the local limit) to that unit.
double length_unit(const RunConfig& c) { return is_trig_family(c) ? c.n : c.window; }
double gamma_factor(const RunConfig& c) { return is_trig_family(c) ? 2.0 * std::numbers::pi : 1.0; }

CountOptions count_options(const RunConfig& c) {
  CountOptions o;
  o.paths = c.paths;
  o.seed = *c.seed;
  o.workers = c.workers;
  o.grid_step = c.grid_step;
  o.refine_tol = c.refine_tol;
  o.lag_accuracy = c.lag_accuracy;
  return o;
}

ojson cumulant_json(const std::vector<CumulantEstimate>& ks) {
  ojson arr = ojson::array();
  for (const auto& k : ks) {
    arr.push_back({{"p", k.p},
                   {"value", k.value},
                   {"std_error", k.std_error},
                   {"per_length", k.per_length()},
                   {"per_length_error", k.per_length_error()}});
  }
  return arr;
}

ojson diagnostics_json(const ZeroDiagnostics& d) {
  return {{"grid_points", d.grid_points},
          {"refinement_iterations", d.refinement_iterations},
          {"rescanned_cells", d.rescanned_cells},
          {"rescan_zeros", d.rescan_zeros},
          {"suspected_misses", d.suspected_misses}};
}

}  // namespace

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

Report cmd_gamma(const RunConfig& c) {
  const CovarianceModel model = make_model(c);
  const GammaOptions options = gamma_options(c);
  Report r;
  r.json = header(c);
  r.json["truncation"] = c.truncation;
  r.json["truncation_high"] = c.truncation_high;
  r.csv_header = {"kind", "index", "value", "error", "tail_bound", "tail_estimate", "monte_carlo"};

  std::map<int, IntegralEstimate> integrals;
  std::string failure;
  try {
    integrals[1] = {gamma1(model), 0.0, 0.0, 0.0, 0, false};
    for (int k = 2; k <= c.p; ++k) integrals[k] = f_k_infinity_integral(model, k, options);
  } catch (const NumericalError& e) {
    failure = e.what();
  }

  ojson ints = ojson::array();
  for (const auto& [k, v] : integrals) {
    ints.push_back({{"k", k},
                    {"value", v.value},
                    {"error", v.error},
                    {"tail_bound", v.tail_bound},
                    {"tail_estimate", v.tail_estimate},
                    {"evaluations", v.evaluations},
                    {"monte_carlo", v.monte_carlo}});
    r.csv_rows.push_back({"integral", std::to_string(k), number(v.value), number(v.error), number(v.tail_bound),
                          number(v.tail_estimate), bool_text(v.monte_carlo)});
  }
  ojson gammas = ojson::array();
  const int complete = static_cast<int>(integrals.size());
  for (int q = 1; q <= complete; ++q) {
    const GammaEntry g = combine_gamma(integrals, q);
    ojson entry{{"p", q}, {"value", g.value}, {"error", g.error}};
    if (is_trig_family(c)) entry["per_n"] = gamma_factor(c) * g.value;
    gammas.push_back(entry);
    r.csv_rows.push_back({"gamma", std::to_string(q), number(g.value), number(g.error), "", "", "false"});
  }
  r.json["gamma"] = gammas;
  r.json["integrals"] = ints;
  if (!failure.empty()) {
    r.json["error"] = failure;
    r.exit_code = 1;
  }
  return r;
}

Report cmd_kac_density(const RunConfig& c) {
  const CovarianceModel model = make_model(c);
  const NodeVector nodes(c.nodes, model.domain());
  KacOptions options;
  options.eta = c.eta;
  options.moment.mc_samples = c.mc_samples;
  options.moment.seed = c.seed.value_or(1);
  const KacEvaluation rho_value = rho(model, nodes, options);

  Report r;
  r.json = header(c);
  r.json["nodes"] = c.nodes;
  r.json["rho"] = rho_value.value;
  r.json["rho_error"] = rho_value.error;
  r.json["partition"] = rho_value.partition_used.partition.to_string();
  r.json["eta"] = rho_value.partition_used.eta;
  r.json["det_m"] = rho_value.det_m;
  r.json["regularized"] = rho_value.regularized;
  r.json["det11"] = rho_value.det11;
  r.json["monte_carlo"] = rho_value.monte_carlo;
  r.csv_header = {"quantity", "value", "error"};
  r.csv_rows.push_back({"rho", number(rho_value.value), number(rho_value.error)});
  r.csv_rows.push_back({"partition", rho_value.partition_used.partition.to_string(), ""});

  const int k = nodes.size();
  if (k <= kMaxCumulantKacSize) {
    const CumulantKacEvaluation f = cumulant_kac_density(model, nodes, options);
    r.json["f"] = f.value;
    r.json["f_error"] = f.error;
    r.csv_rows.push_back({"f", number(f.value), number(f.error)});
  }
  // Unit-constant decay envelope: doubled spanning trees, plus the triangle for three nodes.
  if (k == 2 || k == 3) {
    const auto g = [&](int a, int b) { return model.envelope(model.domain().distance(nodes[a], nodes[b])); };
    double envelope = 0.0;
    if (k == 2) {
      envelope = g(0, 1) * g(0, 1);
    } else {
      const double g01 = g(0, 1), g02 = g(0, 2), g12 = g(1, 2);
      envelope = g01 * g01 * g02 * g02 + g01 * g01 * g12 * g12 + g02 * g02 * g12 * g12 + g01 * g02 * g12;
    }
    r.json["envelope"] = envelope;
    r.csv_rows.push_back({"envelope", number(envelope), ""});
  }
  return r;
}

Report cmd_simulate(const RunConfig& c) {
  const CovarianceModel model = make_model(c);
  ZeroDiagnostics totals;
  const std::vector<double> counts = simulate_zero_counts(model, c.window, count_options(c), &totals);
  Report r;
  r.json = header(c);
  r.json["seed"] = *c.seed;
  r.json["paths"] = c.paths;
  r.json["length_unit"] = length_unit(c);
  if (!is_trig_family(c)) r.json["window"] = c.window;
  if (static_cast<long>(counts.size()) >= 10L * c.batches) {
    r.json["cumulants"] = cumulant_json(mc_cumulants(counts, 4, c.batches, length_unit(c)));
  }
  r.json["diagnostics"] = diagnostics_json(totals);
  r.json["counts"] = counts;
  r.csv_header = {"path", "count"};
  for (std::size_t i = 0; i < counts.size(); ++i) r.csv_rows.push_back({std::to_string(i), number(counts[i])});
  return r;
}

Report cmd_clt_check(const RunConfig& c) {
  const CovarianceModel model = make_model(c);
  ZeroDiagnostics totals;
  const std::vector<double> counts = simulate_zero_counts(model, c.window, count_options(c), &totals);
  const auto ks = mc_cumulants(counts, 4, c.batches, length_unit(c));
  const CltReport clt = clt_report(counts, c.batches);

  Report r;
  r.json = header(c);
  r.json["seed"] = *c.seed;
  r.json["paths"] = c.paths;
  r.json["length_unit"] = length_unit(c);
  r.json["cumulants"] = cumulant_json(ks);
  r.csv_header = {"section", "p", "value", "std_error", "target", "deviation", "flagged"};
  for (const auto& k : ks) {
    r.csv_rows.push_back({"cumulant_per_length", std::to_string(k.p), number(k.per_length()),
                          number(k.per_length_error()), "", "", ""});
  }
  ojson moments = ojson::array();
  for (std::size_t i = 0; i < clt.orders.size(); ++i) {
    moments.push_back({{"p", clt.orders[i]},
                       {"moment", clt.moments[i]},
                       {"target", clt.targets[i]},
                       {"deviation", clt.deviations[i]},
                       {"std_error", clt.std_errors[i]},
                       {"flagged", static_cast<bool>(clt.flagged[i])}});
    r.csv_rows.push_back({"normalized_moment", std::to_string(clt.orders[i]), number(clt.moments[i]),
                          number(clt.std_errors[i]), number(clt.targets[i]), number(clt.deviations[i]),
                          bool_text(clt.flagged[i])});
  }
  r.json["normalized_moments"] = moments;

  try {
    const GammaTable table = gamma_table(model, 2, gamma_options(c));
    const double target = gamma_factor(c) * table.gamma.at(2).value;
    const double quad_error = gamma_factor(c) * table.gamma.at(2).error;
    const double combined = std::hypot(ks[1].per_length_error(), quad_error);
    const bool pass = std::abs(ks[1].per_length() - target) <= 3.0 * combined;
    r.json["variance_check"] = {{"mc", ks[1].per_length()},
                                {"mc_error", ks[1].per_length_error()},
                                {"quadrature", target},
                                {"quadrature_error", quad_error},
                                {"combined_error", combined},
                                {"pass", pass}};
    r.csv_rows.push_back({"variance_check", "2", number(ks[1].per_length()), number(combined), number(target),
                          number(ks[1].per_length() - target), bool_text(!pass)});
  } catch (const NumericalError& e) {
    r.json["variance_check"] = {{"error", e.what()}};
    r.exit_code = 1;
  } catch (const CapabilityError& e) {
    r.json["variance_check"] = {{"error", e.what()}};
  }
  r.json["diagnostics"] = diagnostics_json(totals);
  return r;
}

Report cmd_selftest(const RunConfig& c) {
  auto suites = run_property_suites(c.seed.value_or(1));
  if (c.inject_failure) suites.push_back(injected_failure_suite());
  Report r;
  r.json = header(c);
  r.json.erase("model");
  r.csv_header = {"suite", "check", "status", "measured", "lower", "upper", "seconds"};
  ojson arr = ojson::array();
  bool all = true;
  for (const auto& s : suites) {
    ojson checks = ojson::array();
    for (const auto& ch : s.checks) {
      checks.push_back({{"name", ch.name},
                        {"status", ch.passed ? "pass" : "fail"},
                        {"measured", ch.measured},
                        {"lower", ch.lower},
                        {"upper", ch.upper},
                        {"seconds", ch.seconds}});
      r.csv_rows.push_back({s.suite, ch.name, ch.passed ? "pass" : "fail", number(ch.measured), number(ch.lower),
                            number(ch.upper), number(ch.seconds)});
    }
    arr.push_back({{"suite", s.suite}, {"status", s.passed() ? "pass" : "fail"}, {"seconds", s.seconds},
                   {"checks", checks}});
    all = all && s.passed();
  }
  r.json["suites"] = arr;
  r.json["status"] = all ? "pass" : "fail";
  r.exit_code = all ? 0 : 1;
  return r;
}

Report run_command(const RunConfig& c) {
  if (c.command == "gamma") return cmd_gamma(c);
  if (c.command == "kac-density") return cmd_kac_density(c);
  if (c.command == "simulate") return cmd_simulate(c);
  if (c.command == "clt-check") return cmd_clt_check(c);
  if (c.command == "selftest") return cmd_selftest(c);
  throw UsageError("unknown command '" + c.command + "'");
}

std::string render(const Report& report, const std::string& format) {
  if (format == "json") return report.json.dump(2) + "\n";
  std::string out;
  const auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  };
  line(report.csv_header);
  for (const auto& row : report.csv_rows) line(row);
  return out;
}

}  // namespace kacrice::cli
