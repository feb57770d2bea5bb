#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "levykac/divergences.hpp"
#include "levykac/errors.hpp"
#include "oracles.hpp"

using namespace levykac;

namespace {

// Trapezoid grid on [-L, L] carrying a normalised density.
GridDensity on_grid(const std::function<double(double)>& p, double L = 12.0, int n = 4001) {
  GridDensity g;
  const double h = 2.0 * L / (n - 1);
  for (int i = 0; i < n; ++i) {
    g.nodes.push_back(-L + h * i);
    g.weights.push_back((i == 0 || i == n - 1) ? 0.5 * h : h);
  }
  for (double x : g.nodes) g.values.push_back(p(x));
  const double m = g.mass();
  for (double& v : g.values) v /= m;
  return g;
}

// Gaussian with a random mean and scale, times a random positive trigonometric factor.
GridDensity perturbed_gauss(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double m = 0.5 * u(rng), s = 1.0 + 0.3 * u(rng);
  const double a = 0.4 * u(rng), b = 0.4 * u(rng), k = 1.0 + 2.0 * std::abs(u(rng));
  return on_grid([=](double x) {
    const double z = (x - m) / s;
    return std::exp(-0.5 * z * z) * (1.0 + a * std::sin(k * x) + b * std::cos(2.0 * k * x) * 0.5);
  });
}

double discrete_kl(const GridDensity& p, const GridDensity& q) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const double a = p.weights[i] * p.values[i], b = q.weights[i] * q.values[i];
    if (a > 0.0) h += a * std::log(a / b);
  }
  return h;
}

}  // namespace

TEST(Divergence, IdenticalIsZero) {
  const auto g = on_grid(oracle::gauss);
  EXPECT_NEAR(relative_entropy(g, g), 0.0, 1e-14);
  EXPECT_NEAR(total_variation(g, g), 0.0, 1e-14);
  EXPECT_NEAR(pinsker_margin(g, g), 0.0, 1e-8);
  EXPECT_NEAR(duality_lower_bound(g, g, [](double) { return 0.0; }), 0.0, 1e-14);
}

TEST(Divergence, GaussianClosedForms) {
  // H(N(0,1) | N(0,s^2)) = log s + 1/(2 s^2) - 1/2.
  const double s = 1.4;
  const auto p = on_grid(oracle::gauss);
  const auto q = on_grid([=](double x) { return oracle::gauss(x / s) / s; });
  EXPECT_NEAR(relative_entropy(p, q), std::log(s) + 0.5 / (s * s) - 0.5, 1e-8);
  // TV between N(0,1) and N(1,1) is 2 Phi(1/2) - 1.
  const auto r = on_grid([](double x) { return oracle::gauss(x - 1.0); });
  EXPECT_NEAR(total_variation(p, r), std::erf(0.5 / std::sqrt(2.0)), 1e-6);
}

TEST(Divergence, PinskerOnRandomPairs) {
  std::mt19937_64 rng(20240917);
  for (int i = 0; i < 100; ++i) {
    const auto p = perturbed_gauss(rng);
    const auto q = perturbed_gauss(rng);
    EXPECT_NEAR(relative_entropy(p, q), discrete_kl(p, q), 1e-12);
    EXPECT_GE(pinsker_margin(p, q), -1e-9) << i;
  }
}

TEST(Divergence, DualityNeverExceedsEntropy) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto nu = on_grid(oracle::gauss);
  for (int i = 0; i < 50; ++i) {
    const auto mu = perturbed_gauss(rng);
    const double H = relative_entropy(mu, nu);
    double c[4];
    for (double& x : c) x = 2.0 * u(rng);
    const double k = 0.5 + 3.0 * std::abs(u(rng));
    auto phi = [&](double x) { return c[0] * std::sin(k * x) + c[1] * std::cos(k * x) + c[2] * std::sin(2 * k * x) + c[3]; };
    EXPECT_LE(duality_lower_bound(mu, nu, phi), H + 1e-9) << i;
  }
  // Equality at phi = log(mu / nu).
  const auto mu = perturbed_gauss(rng);
  std::vector<double> ratio(mu.nodes.size());
  for (std::size_t j = 0; j < ratio.size(); ++j) ratio[j] = std::log(mu.values[j] / nu.values[j]);
  std::size_t at = 0;
  auto best = [&](double) { return ratio[at++]; };
  EXPECT_NEAR(duality_lower_bound(mu, nu, best), relative_entropy(mu, nu), 1e-12);
}

TEST(Divergence, Preconditions) {
  auto g = on_grid(oracle::gauss);
  auto h = g;
  h.values[2000] *= 1.01;
  EXPECT_THROW(relative_entropy(g, h), PreconditionError);
  auto shifted = on_grid(oracle::gauss, 11.0);
  EXPECT_THROW(total_variation(g, shifted), PreconditionError);
  auto neg = g;
  neg.values[5] = -neg.values[5];
  neg.values[6] += 2.0 * g.values[5];
  EXPECT_THROW(pinsker_margin(neg, g), PreconditionError);
  auto zero = g;
  zero.values[2000] = 0.0;
  zero.values[1999] += g.values[2000];
  EXPECT_EQ(relative_entropy(g, zero), INFINITY);
  EXPECT_THROW(duality_lower_bound(g, g, [](double) { return INFINITY; }), PreconditionError);
}
