#include "levykac/clt.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "levykac/convolution.hpp"
#include "levykac/errors.hpp"
#include "levykac/quadrature.hpp"
#include "levykac/spectral.hpp"

namespace levykac {
namespace {

using cplx = std::complex<double>;
constexpr double kFresnelSup = 2.07494;

void require_contracting(const StableParams& params) {
  if (!(params.sigma > 0.0)) throw CertificationError("non-contracting exponent", params.sigma);
  validate(params);
}

cplx charfn_signed(const DensityModel& f, double xi) {
  const cplx v = charfn_h(f, std::abs(xi));
  return xi < 0.0 ? std::conj(v) : v;
}

cplx remainder_at(const DensityModel& f, const StableParams& params, double E, double xi) {
  return std::polar(1.0, -xi * E) * charfn_signed(f, xi) - 1.0 + stable_exponent(params, xi);
}

}  // namespace

ConvergenceRecord clt_sup_error(const DensityModel& model, int N, const StableParams& params,
                                const CltOptions& options) {
  require_contracting(params);
  const DensityModel& f = model.generator();
  require(f.analytic_tail().has_value(), "model needs an algebraic tail in the stable range");
  require(N >= 2, "N must be at least 2");
  require(options.grid_pow >= 9 && options.grid_pow <= 22, "grid_pow must lie in [9, 22]");
  require(options.tau > 0.0, "tau must be positive");

  ConvergenceRecord rec;
  rec.N = N;
  rec.tau = options.tau;
  rec.beta_N = std::pow(static_cast<double>(N), -1.0 / (2.0 + 2.0 * options.tau));

  const double E = moments(f).E;
  const double s = std::pow(static_cast<double>(N), 1.0 / params.alpha);
  const double center = N * E;
  const std::size_t n = std::size_t{1} << options.grid_pow;
  std::vector<double> u(n + 1);
  for (std::size_t i = 0; i < n; ++i) u[i] = center - 8.0 * s + 20.0 * s * i / (n - 1);
  u[n] = center;

  ConvolutionPower conv(f, N, {.params = params, .force = options.force});
  const auto r = conv.evaluate(u);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = stable_density(params, (u[i] - center) / s);
    rec.sup_err = std::max(rec.sup_err, std::abs(s * r.values[i] - g));
  }
  rec.gamma0_ratio = s * r.values[n] / stable_density_at_zero(params);
  rec.xi_max = r.xi_max;
  rec.highfreq_bound = r.highfreq_bound;
  rec.trusted = r.trusted;
  return rec;
}

double highfreq_gap(const DensityModel& model, double beta) {
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive");
  const DensityModel& f = model.generator();
  const double E = moments(f).E;
  const double bound_coef = kFresnelSup * tilted_variation(f, 0.0);
  const double step = std::min(beta, 0.02 / E);

  double sup = std::abs(charfn_h(f, beta));
  double arg = beta;
  double xi = beta;
  // Extend the grid until the tail bound drops below the grid maximum.
  while (bound_coef / std::sqrt(xi) > sup) {
    xi += step;
    const double m = std::abs(charfn_h(f, xi));
    if (m > sup) {
      sup = m;
      arg = xi;
    }
  }
  for (int i = 1; i < 64; ++i) {
    const double x = arg - step + 2.0 * step * i / 64.0;
    if (x >= beta) sup = std::max(sup, std::abs(charfn_h(f, x)));
  }
  const double tail_gap = 1.0 - bound_coef / std::sqrt(xi);
  const double eta = std::min(1.0 - sup, tail_gap);
  if (!(eta > 0.0)) throw CertificationError("no gap found", eta);
  return eta;
}

double lowfreq_envelope(const DensityModel& model, const StableParams& params, int grid) {
  require_contracting(params);
  require(grid >= 16, "envelope grid needs at least 16 points");
  const DensityModel& f = model.generator();
  auto holds = [&](double b) {
    for (int i = 0; i < grid; ++i) {
      const double xi = b * std::pow(10.0, -3.0 * (1.0 - static_cast<double>(i) / (grid - 1)));
      if (std::abs(charfn_h(f, xi)) > std::exp(-0.5 * params.sigma * std::pow(xi, params.alpha))) return false;
    }
    return true;
  };
  if (holds(1.0)) return 1.0;
  if (!holds(1e-4)) throw CertificationError("low-frequency envelope not found", 1e-4);
  double lo = std::log(1e-4), hi = 0.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (holds(std::exp(mid)) ? lo : hi) = mid;
  }
  return std::exp(lo);
}

cplx remainder(const DensityModel& model, const StableParams& params, double xi) {
  require(xi != 0.0 && std::isfinite(xi), "remainder needs xi != 0");
  const DensityModel& f = model.generator();
  return remainder_at(f, params, moments(f).E, xi);
}

RemainderProbe omega(const DensityModel& model, const StableParams& params, double beta, int samples) {
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive");
  require(samples >= 2, "omega needs at least two samples");
  const DensityModel& f = model.generator();
  const double E = moments(f).E;
  RemainderProbe p{beta, 0.0, samples};
  for (int i = 0; i < samples; ++i) {
    const double xi = beta * std::pow(100.0, -static_cast<double>(i) / samples);
    p.omega = std::max(p.omega, std::abs(remainder_at(f, params, E, xi)) / std::pow(xi, params.alpha));
  }
  return p;
}

FdaOrderReport fda_order_check(const DensityModel& model, const StableParams& params, double delta,
                               double X) {
  validate(params);
  require(delta > 0.0 && delta < 2.0 - params.alpha, "delta must lie in (0, 2 - alpha)");
  require(X > 0.0 && std::isfinite(X), "X must be positive");
  const DensityModel& f = model.generator();
  const double E = moments(f).E;
  const double a = params.alpha + delta;

  auto h0 = [&](double x) {
    const double u = x + E;
    if (u <= 0.0) return 0.0;
    const double r = std::sqrt(u);
    return (f.pdf(r) + f.pdf(-r)) / (2.0 * r);
  };
  auto integrand = [&](double x) { return std::pow(std::abs(x), a) * std::abs(h0(x) - stable_density(params, x)); };

  FdaOrderReport rep;
  quad::Rule left, right;
  // Left of -E only gamma contributes; octave panels in the distance from -E.
  if (X > E) {
    double lo = 0.0;
    for (double w = std::min(1.0, X - E); lo < X - E; w *= 2.0) {
      const double hi = std::min(lo + w, X - E);
      left.add_panels(-E - hi, -E - lo, 8);
      lo = hi;
    }
  }
  // Right of -E in v = sqrt(x + E), which absorbs the 1/sqrt(u) singularity.
  const double vtop = std::sqrt(X + E);
  std::vector<double> edges{0.0, std::sqrt(E)};
  for (double v = 0.25; v < std::min(4.0, vtop); v += 0.25) edges.push_back(v);
  for (double v = 4.0; v < vtop; v *= 2.0) edges.push_back(v);
  edges.push_back(vtop);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (edges[k + 1] > vtop) break;
    right.add_panels(edges[k], edges[k + 1], edges[k] >= 4.0 ? 16 : 1);
  }
  rep.integral = left.integrate(integrand);
  rep.integral += right.integrate([&](double v) {
    const double x = v * v - E;
    return std::pow(std::abs(x), a) * std::abs((f.pdf(v) + f.pdf(-v)) - 2.0 * v * stable_density(params, x));
  });

  // Least-squares slope of log integrand against log x on [X/2, X].
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (int i = 0; i <= 32; ++i) {
    const double x = 0.5 * X * std::pow(2.0, i / 32.0);
    const double y = integrand(x);
    if (!(y > 0.0)) continue;
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  rep.decay_exponent = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : -INFINITY;
  rep.assessed_finite = rep.decay_exponent < -1.0;
  return rep;
}

}  // namespace levykac
