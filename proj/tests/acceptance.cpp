#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "kacrice/asymptotics.hpp"
#include "kacrice/estimate.hpp"
#include "kacrice/kac.hpp"
#include "kacrice/selfcheck.hpp"

using namespace kacrice;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool pass, const std::string& detail, Clock::time_point start) {
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Trig-polynomial zero counts over the full circle; every n gets its own fixed seed.
std::vector<double> trig_counts(int n, long paths) {
  CountOptions options;
  options.paths = paths;
  options.seed = 1000 + static_cast<std::uint64_t>(n);
  return simulate_zero_counts(CovarianceModel::trig_poly(n), 0.0, options);
}

}  // namespace

int main() {
  const double two_pi = 2.0 * std::numbers::pi;
  const auto sinc = CovarianceModel::sinc();

  {
    const auto start = Clock::now();
    const int n = 50;
    const auto k = mc_cumulants(trig_counts(n, 2000), 1, 20, n);
    const double target = 2.0 / std::sqrt(3.0);
    const double finite_n = 2.0 * std::sqrt((n - 1.0) * (2.0 * n - 1.0) / 6.0) / n;
    const double rel = std::abs(k[0].per_length() / target - 1.0);
    report(1, rel < 0.01,
           format("kappa1/n = %.5f +- %.5f vs 2/sqrt(3) = %.6f, rel err %.4f (tol 0.01); exact finite-n mean %.5f",
                  k[0].per_length(), k[0].per_length_error(), target, rel, finite_n),
           start);
  }

  {
    const auto start = Clock::now();
    const double value = rho(sinc, NodeVector({0.0})).value;
    const double exact = 1.0 / (std::numbers::pi * std::sqrt(3.0));
    report(2, std::abs(value - exact) < 1e-6,
           format("rho = %.12f vs 1/(pi sqrt 3) = %.12f, err %.2e (tol 1e-6)", value, exact, std::abs(value - exact)),
           start);
  }

  auto start = Clock::now();
  GammaOptions quad_options;
  quad_options.truncation = 320.0;
  quad_options.truncation_high = 80.0;
  const auto table = gamma_table(sinc, 3, quad_options);
  const double quad_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const auto g2 = table.gamma.at(2);
  const auto g3 = table.gamma.at(3);

  {
    CountOptions options;
    options.paths = 4000;
    options.seed = 7;
    const double r = 200.0;
    const auto k = mc_cumulants(simulate_zero_counts(sinc, r, options), 2, 20, r);
    const double combined = std::hypot(k[1].per_length_error(), g2.error);
    const double diff = k[1].per_length() - g2.value;
    report(3, std::abs(diff) < 3.0 * combined,
           format("Var/R = %.5f +- %.5f vs gamma2 = %.5f +- %.5f, diff %.2f combined SE (tol 3; quadrature %.1f s)",
                  k[1].per_length(), k[1].per_length_error(), g2.value, g2.error, diff / combined, quad_seconds),
           start);
  }

  start = Clock::now();
  const auto k40 = mc_cumulants(trig_counts(40, 20000), 3, 20, 40.0);
  const auto counts80 = trig_counts(80, 20000);
  const auto k80 = mc_cumulants(counts80, 3, 20, 80.0);
  {
    const double limit = two_pi * g3.value;
    const double limit_error = two_pi * g3.error;
    const auto& a = k40[2];
    const auto& b = k80[2];
    const double stab = std::abs(a.per_length() - b.per_length()) / std::hypot(a.per_length_error(), b.per_length_error());
    const double z40 = std::abs(a.per_length() - limit) / std::hypot(a.per_length_error(), limit_error);
    const double z80 = std::abs(b.per_length() - limit) / std::hypot(b.per_length_error(), limit_error);
    report(4, stab < 3.0 && z40 < 3.0 && z80 < 3.0,
           format("kappa3/n: n=40 %.4f +- %.4f, n=80 %.4f +- %.4f (gap %.2f sigma); 2 pi gamma3 = %.4f +- %.4f "
                  "(n=40 %.2f sigma, n=80 %.2f sigma; tol 3)",
                  a.per_length(), a.per_length_error(), b.per_length(), b.per_length_error(), stab, limit,
                  limit_error, z40, z80),
           start);
  }

  start = Clock::now();
  {
    const auto counts100 = trig_counts(100, 20000);
    const std::vector<double> first(counts100.begin(), counts100.begin() + 4000);
    const auto small = clt_report(first);
    const auto full100 = clt_report(counts100);
    const auto full25 = clt_report(trig_counts(25, 20000));
    const double m3 = small.moments[1];
    const double m4 = small.moments[2];
    const double e100 = std::abs(full100.deviations[1]);
    const double e25 = std::abs(full25.deviations[1]);
    report(5, std::abs(m3) <= 0.15 && std::abs(m4 - 3.0) <= 0.4 && e100 < e25,
           format("n=100, 4000 paths: E W^3 = %.4f (tol 0.15), E W^4 = %.4f (tol 0.4); 20000 paths: |E W^3| "
                  "n=100 %.4f +- %.4f < n=25 %.4f +- %.4f",
                  m3, m4, e100, full100.std_errors[1], e25, full25.std_errors[1]),
           start);
  }

  start = Clock::now();
  {
    const auto k20 = mc_cumulants(trig_counts(20, 20000), 3);
    const auto raw80 = mc_cumulants(counts80, 3);
    const double r20 = std::abs(k20[2].value) / std::pow(20.0, 1.5);
    const double r80 = std::abs(raw80[2].value) / std::pow(80.0, 1.5);
    const bool halved = r80 < 0.5 * r20;
    const bool null = std::abs(raw80[2].value) < 2.0 * raw80[2].std_error;
    report(6, halved || null,
           format("|kappa3|/n^1.5: n=20 %.5f, n=80 %.5f (ratio %.3f, tol 0.5); n=80 kappa3 = %.2f +- %.2f (%.2f sigma, "
                  "tol 2)",
                  r20, r80, r80 / r20, raw80[2].value, raw80[2].std_error,
                  std::abs(raw80[2].value) / raw80[2].std_error),
           start);
  }

  start = Clock::now();
  {
    const auto suites = run_property_suites(1);
    bool pass = true;
    std::string detail;
    for (const auto& s : suites) {
      const bool ok = s.passed() && s.seconds < 60.0;
      pass = pass && ok;
      detail += format("%s%s %s %.1fs", detail.empty() ? "" : "; ", s.suite.c_str(), ok ? "ok" : "FAILED", s.seconds);
      for (const auto& c : s.checks) {
        if (!c.passed) detail += format(" [%s: %.3g not in [%.3g, %.3g]]", c.name.c_str(), c.measured, c.lower, c.upper);
      }
    }
    report(7, pass, detail, start);
  }

  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
