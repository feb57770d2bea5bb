#include "levykac/divergences.hpp"

#include <cmath>
#include <limits>

#include "levykac/errors.hpp"

namespace levykac {
namespace {

// Discrete probability vectors w_i p_i / sum.
std::pair<std::vector<double>, std::vector<double>> discrete(const GridDensity& mu, const GridDensity& nu) {
  require(mu.nodes == nu.nodes && mu.weights == nu.weights, "grid densities must share their nodes");
  require(mu.values.size() == mu.nodes.size() && nu.values.size() == nu.nodes.size(),
          "grid density sizes do not match");
  require(std::abs(mu.mass() - 1.0) <= 1e-6 && std::abs(nu.mass() - 1.0) <= 1e-6,
          "grid densities must integrate to 1 within 1e-6");
  std::vector<double> a(mu.nodes.size()), b(nu.nodes.size());
  const double ma = mu.mass(), mb = nu.mass();
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(mu.values[i] >= 0.0 && nu.values[i] >= 0.0 && mu.weights[i] >= 0.0, "grid densities must be nonnegative");
    a[i] = mu.weights[i] * mu.values[i] / ma;
    b[i] = nu.weights[i] * nu.values[i] / mb;
  }
  return {a, b};
}

}  // namespace

double GridDensity::mass() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
  return s;
}

double relative_entropy(const GridDensity& mu, const GridDensity& nu) {
  const auto [a, b] = discrete(mu, nu);
  double h = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    if (b[i] == 0.0) return std::numeric_limits<double>::infinity();
    h += a[i] * std::log(a[i] / b[i]);
  }
  return std::max(h, 0.0);
}

double total_variation(const GridDensity& mu, const GridDensity& nu) {
  const auto [a, b] = discrete(mu, nu);
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

double pinsker_margin(const GridDensity& mu, const GridDensity& nu) {
  return std::sqrt(2.0 * relative_entropy(mu, nu)) - total_variation(mu, nu);
}

double duality_lower_bound(const GridDensity& mu, const GridDensity& nu,
                           const std::function<double(double)>& phi) {
  const auto [a, b] = discrete(mu, nu);
  double lin = 0.0;
  std::vector<double> p(a.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    p[i] = phi(mu.nodes[i]);
    require(std::isfinite(p[i]), "test function must be bounded on the grid");
    lin += a[i] * p[i];
    if (b[i] > 0.0) top = std::max(top, p[i]);
  }
  // log sum b_i e^{phi_i}, shifted by the largest exponent.
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * std::exp(p[i] - top);
  return lin - (top + std::log(s));
}

}  // namespace levykac
