#include "levykac/kac_sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levykac/errors.hpp"
#include "levykac/quadrature.hpp"

namespace levykac {
namespace {

constexpr double kPi = std::numbers::pi;

std::optional<StableParams> stable_from_tail(const DensityModel& f) {
  if (!f.analytic_tail()) return std::nullopt;
  try {
    const auto tl = estimate_tail_law(h_of(f), 1e4, 1e8);
    return exponent_from_tail({tl.C_S, tl.alpha, tl.p, tl.q});
  } catch (const CertificationError&) {
    return std::nullopt;
  }
}

double check_value(const NfoldResult& r, bool force) {
  const double v = r.values.at(0);
  if (!(v > 0.0)) throw CertificationError("convolution density is not positive", v);
  if (!r.trusted && !force) throw CertificationError("untrusted cutoff", r.highfreq_bound);
  return v;
}

// Panels in theta for v = sqrt(N) sin(theta), fine enough to resolve f, with
// extra edges at the given |v| values.
quad::Rule theta_rule(int N, double ell, const std::vector<double>& breaks = {}) {
  const double R = std::sqrt(static_cast<double>(N));
  const int panels = std::max(32, static_cast<int>(std::ceil(8.0 * R / ell)));
  std::vector<double> edges{-0.5 * kPi, 0.5 * kPi};
  for (double b : breaks) {
    if (b <= 0.0 || b >= R) continue;
    edges.push_back(std::asin(b / R));
    edges.push_back(-std::asin(b / R));
  }
  std::sort(edges.begin(), edges.end());
  quad::Rule t;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double w = edges[k + 1] - edges[k];
    if (w > 0.0) t.add_panels(edges[k], edges[k + 1], std::max(2, static_cast<int>(std::ceil(panels * w / kPi))));
  }
  quad::Rule v;
  for (std::size_t i = 0; i < t.size(); ++i) {
    v.nodes.push_back(R * std::sin(t.nodes[i]));
    v.weights.push_back(R * std::cos(t.nodes[i]) * t.weights[i]);
  }
  return v;
}

// Rule on [0, top]: fine panels near the origin, then octaves of 16 panels,
// with extra edges at the given points.
quad::Rule radial_rule(double top, double scale, const std::vector<double>& breaks = {}) {
  std::vector<double> edges{0.0};
  const double fine = std::min(top, 8.0 * scale);
  for (int i = 1; i <= 16; ++i) edges.push_back(fine * i / 16.0);
  for (double a = fine; a < top; a *= 2.0) {
    const double b = std::min(2.0 * a, top);
    for (int i = 1; i <= 16; ++i) edges.push_back(a + (b - a) * i / 16.0);
  }
  for (double b : breaks)
    if (b > 0.0 && b < top) edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  quad::Rule r;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) r.add_panel(edges[k], edges[k + 1]);
  return r;
}

// Points s in (0, N) where g_k(s) crosses 1; |Pi_k - f^{(x)k}| has kinks there.
std::vector<double> unit_crossings(const SphereLaw& law, int k) {
  const double N = law.N();
  const int n = 1024;
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = N * (i + 0.5) / n;
  const auto g = law.radial_factor(k, s);
  std::vector<double> roots;
  for (int i = 0; i + 1 < n; ++i) {
    if ((g[i] > 1.0) == (g[i + 1] > 1.0)) continue;
    double a = s[i], b = s[i + 1];
    const bool rising = g[i + 1] > 1.0;
    for (int it = 0; it < 60; ++it) {
      const double m[1] = {0.5 * (a + b)};
      ((law.radial_factor(k, m)[0] > 1.0) == rising ? b : a) = m[0];
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

}  // namespace

double log_sphere_area(int N) {
  require(N >= 1, "sphere dimension must be positive");
  return std::log(2.0) + 0.5 * N * std::log(kPi) - std::lgamma(0.5 * N);
}

double log_normalisation(const DensityModel& model, int N, double u, bool force) {
  require(N >= 3, "log_normalisation needs N >= 3");
  require(u > 0.0 && std::isfinite(u), "log_normalisation needs u > 0");
  const DensityModel& f = model.generator();
  const double pt[1] = {u};
  const double h = check_value(ConvolutionPower(f, N, {.params = stable_from_tail(f), .force = force}).evaluate(pt), force);
  return std::log(2.0) + std::log(h) - log_sphere_area(N) - 0.5 * (N - 2) * std::log(u);
}

SphereLaw::SphereLaw(const DensityModel& model, int N, bool force)
    : model_(model.generator()), N_(N), force_(force) {
  require(N >= 3, "a sphere law needs N >= 3");
  stable_ = stable_from_tail(model_);
  const double pt[1] = {static_cast<double>(N)};
  const auto r = ConvolutionPower(model_, N, {.params = stable_, .force = force}).evaluate(pt);
  h_N_at_N_ = check_value(r, force);
  h_N_bound_ = r.highfreq_bound;
  trusted_ = r.trusted;
  for (int k = 1; k <= 2 && N - k >= 2; ++k) {
    powers_.push_back(std::make_unique<ConvolutionPower>(model_, N - k, NfoldOptions{.params = stable_, .force = force}));
  }
}

double SphereLaw::log_Z() const {
  return std::log(2.0) + std::log(h_N_at_N_) - log_sphere_area(N_) - 0.5 * (N_ - 2) * std::log(static_cast<double>(N_));
}

std::vector<double> SphereLaw::radial_factor(int k, std::span<const double> s) const {
  require(k >= 1 && k <= N_ - 3, "marginal order must lie in [1, N - 3]");
  std::vector<double> u(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) u[i] = N_ - s[i];
  NfoldResult r;
  if (k <= static_cast<int>(powers_.size())) {
    r = powers_[k - 1]->evaluate(u);
  } else {
    r = ConvolutionPower(model_, N_ - k, {.params = stable_, .force = force_}).evaluate(u);
  }
  for (double& x : r.values) x /= h_N_at_N_;
  return r.values;
}

std::vector<double> SphereLaw::first_marginal(std::span<const double> v) const {
  std::vector<double> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] * v[i];
  auto g = radial_factor(1, s);
  // Negative values are roundoff far below the certified absolute accuracy.
  for (std::size_t i = 0; i < v.size(); ++i) g[i] = s[i] >= N_ ? 0.0 : model_.pdf(v[i]) * std::max(g[i], 0.0);
  return g;
}

double marginal_k(const SphereLaw& law, int k, std::span<const double> v) {
  require(static_cast<int>(v.size()) == k, "point dimension must equal k");
  double s = 0.0, prod = 1.0;
  for (double x : v) {
    s += x * x;
    prod *= law.model().pdf(x);
  }
  if (s >= law.N()) {
    require(k >= 1 && k <= law.N() - 3, "marginal order must lie in [1, N - 3]");
    return 0.0;
  }
  const double pt[1] = {s};
  return prod * std::max(law.radial_factor(k, pt)[0], 0.0);
}

GridDensity sphere_grid(const SphereLaw& law) {
  auto rule = theta_rule(law.N(), law.model().length_scale());
  GridDensity g{rule.nodes, rule.weights, {}};
  g.values = law.first_marginal(g.nodes);
  return g;
}

double l1_marginal_gap(const SphereLaw& law, int k) {
  require(k == 1 || k == 2, "l1_marginal_gap supports k in {1, 2}");
  const DensityModel& f = law.model();
  const double N = law.N();
  const auto roots = unit_crossings(law, k);
  if (k == 1) {
    std::vector<double> breaks;
    for (double r : roots) breaks.push_back(std::sqrt(r));
    const auto rule = theta_rule(law.N(), f.length_scale(), breaks);
    const auto pi1 = law.first_marginal(rule.nodes);
    double gap = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) gap += rule.weights[i] * std::abs(pi1[i] - f.pdf(rule.nodes[i]));
    const double R = std::sqrt(N);
    return gap + upper_tail_mass(f, R) + lower_tail_mass(f, R);
  }
  // |Pi_2 - f (x) f| = f(v1) f(v2) |g_2(|v|^2) - 1|, so the plane integral
  // reduces to one over s = |v|^2 against the law of V1^2 + V2^2.
  const auto rule = radial_rule(N, f.length_scale() * f.length_scale(), roots);
  const auto g = law.radial_factor(2, rule.nodes);
  const auto rho = ConvolutionPower(f, 2).evaluate(rule.nodes).values;
  double gap = 0.0, inside = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    gap += rule.weights[i] * rho[i] * std::abs(g[i] - 1.0);
    inside += rule.weights[i] * rho[i];
  }
  return gap + std::max(0.0, 1.0 - inside);
}

double entropy_per_particle(const SphereLaw& law) {
  const auto grid = sphere_grid(law);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    if (grid.values[i] > 0.0) s += grid.weights[i] * grid.values[i] * law.model().log_pdf(grid.nodes[i]);
  }
  return s - law.log_Z() / law.N();
}

double entropy_target(const DensityModel& model) {
  const DensityModel& f = model.generator();
  return integrate_against(f, [&](double x) { return f.log_pdf(x); }) + 0.5 * (std::log(2.0 * kPi) + 1.0);
}

CrossEntropy cross_entropy_per_particle(const DensityModel& gen, const DensityModel& base, int N, bool force) {
  const DensityModel& g = gen.generator();
  const DensityModel& f = base.generator();
  const SphereLaw G(g, N, force);
  const auto grid = sphere_grid(G);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    if (grid.values[i] <= 0.0) continue;
    const double lf = f.log_pdf(grid.nodes[i]);
    if (!std::isfinite(lf)) throw CertificationError("infinite relative entropy", grid.nodes[i]);
    s += grid.weights[i] * grid.values[i] * (g.log_pdf(grid.nodes[i]) - lf);
  }
  const SphereLaw F(f, N, force);
  CrossEntropy out;
  out.value = s + (F.log_Z() - G.log_Z()) / N;
  out.target = integrate_against(g, [&](double x) { return g.log_pdf(x) - f.log_pdf(x); });
  return out;
}

double fisher_relative(const DensityModel& model) {
  const DensityModel& f = model.generator();
  require(f.has_derivative(),
          "fisher_relative needs the model derivative; supply one in the model definition");
  return integrate_against(f, [&](double x) {
    const double p = f.pdf(x);
    if (!(p > 1e-300)) return 0.0;
    const double s = f.derivative(x) / p + x;
    return s * s;
  });
}

double w1_first_marginal(const SphereLaw& law) {
  const DensityModel& f = law.model();
  const double R = std::sqrt(static_cast<double>(law.N()));
  const int M = 4096;
  std::vector<double> theta(M + 1), v(M + 1), jac(M + 1);
  for (int j = 0; j <= M; ++j) {
    theta[j] = -0.5 * kPi + kPi * j / M;
    v[j] = R * std::sin(theta[j]);
    jac[j] = R * std::cos(theta[j]);
  }
  v.front() = -R;
  v.back() = R;
  const auto pi1 = law.first_marginal(v);
  const double h = kPi / M;
  double Fp = 0.0, Ff = lower_tail_mass(f, R);
  double w1 = 0.0, prev = std::abs(Fp - Ff) * jac[0];
  for (int j = 1; j <= M; ++j) {
    Fp += 0.5 * h * (pi1[j - 1] * jac[j - 1] + pi1[j] * jac[j]);
    Ff += 0.5 * h * (f.pdf(v[j - 1]) * jac[j - 1] + f.pdf(v[j]) * jac[j]);
    const double cur = std::abs(Fp - Ff) * jac[j];
    w1 += 0.5 * h * (prev + cur);
    prev = cur;
  }
  // Outside the box one CDF is 0 or 1: add E(V - R)_+ and E(-V - R)_+.
  w1 += quad::integrate_to_infinity([&](double x) { return upper_tail_mass(f, x); }, R, 60);
  w1 += quad::integrate_to_infinity([&](double x) { return lower_tail_mass(f, x); }, R, 60);
  return w1;
}

std::pair<GridDensity, GridDensity> first_marginal_pair(const SphereLaw& law) {
  const DensityModel& f = law.model();
  const double R = std::sqrt(static_cast<double>(law.N()));
  GridDensity pi1 = sphere_grid(law);
  double X = 2.0 * R;
  while (upper_tail_mass(f, X) + lower_tail_mass(f, X) > 1e-9 && X < 1e8) X *= 2.0;
  quad::Rule out;
  for (double a = R; a < X; a *= 2.0) out.add_panels(a, std::min(2.0 * a, X), 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      pi1.nodes.push_back(sgn * out.nodes[i]);
      pi1.weights.push_back(out.weights[i]);
      pi1.values.push_back(0.0);
    }
  }
  GridDensity fg{pi1.nodes, pi1.weights, std::vector<double>(pi1.nodes.size())};
  for (std::size_t i = 0; i < fg.nodes.size(); ++i) fg.values[i] = f.pdf(fg.nodes[i]);
  return {pi1, fg};
}

ChaosReport chaos_report(const SphereLaw& law) {
  ChaosReport r;
  r.N = law.N();
  r.l1_gap_k1 = l1_marginal_gap(law, 1);
  r.l1_gap_k2 = law.N() >= 5 ? l1_marginal_gap(law, 2) : std::nan("");
  r.entropy_per_particle = entropy_per_particle(law);
  r.entropy_target = entropy_target(law.model());
  r.w1_first_marginal = w1_first_marginal(law);
  const auto [mu, nu] = first_marginal_pair(law);
  r.pinsker_margin = pinsker_margin(mu, nu);
  r.fisher_relative = law.model().has_derivative() ? fisher_relative(law.model()) : std::nan("");
  r.trusted = law.trusted();
  return r;
}

}  // namespace levykac
