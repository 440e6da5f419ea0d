#include "kacrice/quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>

#include "kacrice/errors.hpp"

namespace kacrice::quad {

namespace {

Rule compute_gauss_legendre(int n) {
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  if (n < 1 || n > 512) throw ContractError("gauss_legendre: order must lie in [1, 512]");
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

Rule gauss_legendre(int n, double a, double b) {
  const Rule& base = gauss_legendre(n);
  Rule rule;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < base.nodes.size(); ++i) {
    rule.nodes.push_back(mid + half * base.nodes[i]);
    rule.weights.push_back(half * base.weights[i]);
  }
  return rule;
}

Rule composite(int order, double a, double b, int panels) {
  if (panels < 1) throw ContractError("composite: need at least one panel");
  Rule rule;
  const double width = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const Rule piece = gauss_legendre(order, a + k * width, a + (k + 1) * width);
    rule.nodes.insert(rule.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    rule.weights.insert(rule.weights.end(), piece.weights.begin(), piece.weights.end());
  }
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, int order, int panels) {
  const Rule rule = composite(order, a, b, panels);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
  return sum;
}

SimplexRule simplex_rule(int dim, int order) {
  if (dim < 0 || dim > 8) throw SizeLimitError("simplex_rule: dimension must lie in [0, 8]");
  SimplexRule rule;
  rule.dim = dim;
  if (dim == 0) {
    rule.barycentric.push_back({1.0});
    rule.weights.push_back(1.0);
    return rule;
  }
  const Rule line = gauss_legendre(order, 0.0, 1.0);
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= line.nodes.size();
  if (total > 20'000'000) throw SizeLimitError("simplex_rule: tensor rule too large");
  std::vector<std::size_t> index(static_cast<std::size_t>(dim), 0);
  for (std::size_t count = 0; count < total; ++count) {
    // Duffy map: t_1 = u_1, t_k = (1 - u_1)...(1 - u_{k-1}) u_k, remainder to t_{dim+1};
    // its Jacobian is the product of `remaining` taken before each coordinate.
    std::vector<double> t(static_cast<std::size_t>(dim) + 1, 0.0);
    double remaining = 1.0;
    double weight = 1.0;
    for (int d = 0; d < dim; ++d) {
      const double u = line.nodes[index[static_cast<std::size_t>(d)]];
      t[static_cast<std::size_t>(d)] = remaining * u;
      weight *= line.weights[index[static_cast<std::size_t>(d)]] * remaining;
      remaining *= (1.0 - u);
    }
    t[static_cast<std::size_t>(dim)] = remaining;
    rule.barycentric.push_back(std::move(t));
    rule.weights.push_back(weight);
    for (int d = 0; d < dim; ++d) {
      if (++index[static_cast<std::size_t>(d)] < line.nodes.size()) break;
      index[static_cast<std::size_t>(d)] = 0;
    }
  }
  return rule;
}

namespace {

struct Cell {
  double x0, y0, size_x, size_y;
  double value, error;
  bool operator<(const Cell& other) const { return error < other.error; }
};

std::pair<double, double> evaluate_cell(const std::function<double(double, double)>& f, double x0, double y0,
                                        double sx, double sy, int& evaluations) {
  const Rule& low = gauss_legendre(6);
  const Rule& high = gauss_legendre(10);
  const auto tensor = [&](const Rule& r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double x = x0 + 0.5 * sx * (r.nodes[i] + 1.0);
      for (std::size_t j = 0; j < r.nodes.size(); ++j) {
        const double y = y0 + 0.5 * sy * (r.nodes[j] + 1.0);
        sum += r.weights[i] * r.weights[j] * f(x, y);
      }
    }
    evaluations += static_cast<int>(r.nodes.size() * r.nodes.size());
    return 0.25 * sx * sy * sum;
  };
  const double coarse = tensor(low);
  const double fine = tensor(high);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace

AdaptiveResult adaptive_square(const std::function<double(double, double)>& f, double abs_tol, double rel_tol,
                               int max_evaluations) {
  AdaptiveResult result;
  std::priority_queue<Cell> cells;
  {
    auto [v, e] = evaluate_cell(f, 0.0, 0.0, 1.0, 1.0, result.evaluations);
    cells.push({0.0, 0.0, 1.0, 1.0, v, e});
  }
  double total = cells.top().value;
  double error = cells.top().error;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (result.evaluations >= max_evaluations) {
      result.converged = false;
      break;
    }
    const Cell worst = cells.top();
    cells.pop();
    total -= worst.value;
    error -= worst.error;
    const double hx = 0.5 * worst.size_x;
    const double hy = 0.5 * worst.size_y;
    for (int k = 0; k < 4; ++k) {
      const double x0 = worst.x0 + (k % 2) * hx;
      const double y0 = worst.y0 + (k / 2) * hy;
      auto [v, e] = evaluate_cell(f, x0, y0, hx, hy, result.evaluations);
      cells.push({x0, y0, hx, hy, v, e});
      total += v;
      error += e;
    }
  }
  // Recompute from the leaves to shed accumulated rounding in the running sums.
  result.value = 0.0;
  result.error = 0.0;
  while (!cells.empty()) {
    result.value += cells.top().value;
    result.error += cells.top().error;
    cells.pop();
  }
  return result;
}

namespace {

void bisect(const std::function<double(double)>& f, double a, double b, double whole, double abs_tol, int depth,
            AdaptiveResult& result) {
  const auto rule = [&](int n, double lo, double hi) {
    const Rule& base = gauss_legendre(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < base.nodes.size(); ++i) sum += base.weights[i] * f(0.5 * (lo + hi) + 0.5 * (hi - lo) * base.nodes[i]);
    result.evaluations += n;
    return 0.5 * (hi - lo) * sum;
  };
  const double mid = 0.5 * (a + b);
  const double left = rule(10, a, mid);
  const double right = rule(10, mid, b);
  const double error = std::abs(left + right - whole);
  if (error <= abs_tol || depth <= 0) {
    if (error > abs_tol) result.converged = false;
    result.value += left + right;
    result.error += error;
    return;
  }
  bisect(f, a, mid, left, 0.5 * abs_tol, depth - 1, result);
  bisect(f, mid, b, right, 0.5 * abs_tol, depth - 1, result);
}

}  // namespace

AdaptiveResult adaptive_interval(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                 double rel_tol, int max_depth) {
  AdaptiveResult result;
  const Rule& base = gauss_legendre(10);
  double whole = 0.0;
  for (std::size_t i = 0; i < base.nodes.size(); ++i) whole += base.weights[i] * f(0.5 * (a + b) + 0.5 * (b - a) * base.nodes[i]);
  whole *= 0.5 * (b - a);
  result.evaluations = 10;
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  bisect(f, a, b, whole, tol, max_depth, result);
  return result;
}

}  // namespace kacrice::quad
