#include "levykac/quadrature.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <mutex>
#include <numbers>

#include "levykac/errors.hpp"

namespace levykac::quad {
namespace {

GaussLegendre compute_rule(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
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
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  require(n >= 2 && n <= 64, "Gauss-Legendre order must lie in [2, 64]");
  static std::array<std::unique_ptr<GaussLegendre>, 65> cache;
  static std::array<std::once_flag, 65> flags;
  std::call_once(flags[n], [n] { cache[n] = std::make_unique<GaussLegendre>(compute_rule(n)); });
  return *cache[n];
}

void Rule::add_panel(double a, double b, int n) {
  const auto& gl = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    nodes.push_back(mid + half * gl.nodes[i]);
    weights.push_back(half * gl.weights[i]);
  }
}

void Rule::add_panels(double a, double b, int count, int n) {
  const double h = (b - a) / count;
  for (int p = 0; p < count; ++p) add_panel(a + p * h, (p + 1 == count) ? b : a + (p + 1) * h, n);
}

void Rule::add_bounded(double a, double b, double max_width, int n) {
  if (b <= a) return;
  const int count = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
  add_panels(a, b, count, n);
}

Rule graded_to_zero(double a, int levels, int n) {
  Rule rule;
  double lo = a * std::ldexp(1.0, -levels);
  rule.add_panel(0.0, lo, n);
  for (int k = levels; k > 0; --k) {
    const double hi = 2.0 * lo;
    rule.add_panel(lo, hi, n);
    lo = hi;
  }
  return rule;
}

}  // namespace levykac::quad
