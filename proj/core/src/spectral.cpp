#include "levykac/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "levykac/errors.hpp"
#include "levykac/quadrature.hpp"

namespace levykac {
namespace {

using cplx = std::complex<double>;
constexpr double kPanelPhase = 3.0;

// Sum over u >= U of u^{-s} e^{i zeta u}, by its asymptotic expansion.
cplx asymptotic_tail(double s, double U, cplx zeta, double& err) {
  if (zeta == 0.0) return std::pow(U, 1.0 - s) / (s - 1.0);
  const cplx lead = cplx(0.0, 1.0) * std::exp(cplx(0.0, 1.0) * zeta * U) * std::pow(U, -s) / zeta;
  const cplx r = cplx(0.0, -1.0) / (zeta * U);
  cplx term = 1.0;
  cplx sum = 1.0;
  double prev = 1.0;
  for (int j = 0; j < 200; ++j) {
    term *= (s + j) * r;
    const double a = std::abs(term);
    if (a > prev) break;
    sum += term;
    prev = a;
    if (a < 1e-18) break;
  }
  err += std::abs(lead) * prev;
  return lead * sum;
}

}  // namespace

double min_tilt(const DensityModel& model) {
  const DensityModel& gen = model.generator();
  return gen.gaussian_rate() > 0.0 ? -0.95 * gen.gaussian_rate() : 0.0;
}

TiltedValue tilted_transform(const DensityModel& model, cplx zeta) {
  const DensityModel& f = model.generator();
  const double xi = zeta.real();
  const double kappa = zeta.imag();
  const double rate = f.gaussian_rate();
  const bool light = rate > 0.0;
  require(kappa >= min_tilt(f) && (light || kappa >= 0.0), "tilt outside the admissible range");

  double V = f.core_half_width();
  if (light) V = std::sqrt(40.0 / (rate + kappa));
  else if (kappa > 0.0) V = std::min(V, std::sqrt(60.0 / kappa));
  const bool numeric_tail = !light && V >= f.core_half_width();

  const auto& gl = quad::gauss_legendre(16);
  cplx t0 = 0.0, t1 = 0.0;
  double mag = 0.0;
  const double w = 0.25 * f.length_scale();
  const double axi = std::abs(xi);
  for (double a = 0.0; a < V;) {
    double b = std::min(a + w, V);
    if (axi > 0.0) b = std::min(b, std::sqrt(a * a + kPanelPhase / axi));
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < 16; ++i) {
      const double v = mid + half * gl.nodes[i];
      const double v2 = v * v;
      const cplx e = (f.pdf(v) + f.pdf(-v)) * half * gl.weights[i] * std::exp(cplx(0.0, 1.0) * zeta * v2);
      t0 += e;
      t1 += e * v2;
      mag += std::abs(e);
    }
    a = b;
  }

  double err = 1e-15 * mag;
  if (numeric_tail) {
    const double U1 = V * V;
    const double U2 = zeta == 0.0 ? U1 : std::max(U1, 40.0 / std::abs(zeta));
    const double kap = std::max(kappa, 0.0);
    for (double a = U1; a < U2;) {
      double b = std::min(2.0 * a, U2);
      if (axi > 0.0) b = std::min(b, a + kPanelPhase / axi);
      // Once e^{-kappa u} is negligible the remaining tail does not matter.
      if (kap * a > 60.0) break;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int i = 0; i < 16; ++i) {
        const double u = mid + half * gl.nodes[i];
        const double r = std::sqrt(u);
        const double h = (f.pdf(r) + f.pdf(-r)) / (2.0 * r);
        const cplx e = h * half * gl.weights[i] * std::exp(cplx(0.0, 1.0) * zeta * u);
        t0 += e;
        t1 += e * u;
        mag += std::abs(e);
      }
      a = b;
    }
    if (kap * U2 <= 60.0) {
      const auto& t = *f.tail_expansion();
      for (std::size_t k = 0; k < t.coeff.size(); ++k) {
        const double s = 0.5 * (t.power[k] + 1.0);
        double e0 = 0.0, e1 = 0.0;
        t0 += t.coeff[k] * asymptotic_tail(s, U2, zeta, e0);
        t1 += t.coeff[k] * asymptotic_tail(s - 1.0, U2, zeta, e1);
        err += std::abs(t.coeff[k]) * e0;
      }
    }
    err += 1e-15 * mag;
  }
  return {t0, t1, err};
}

cplx charfn_h(const DensityModel& model, double xi) {
  if (xi == 0.0) return 1.0;
  const auto v = tilted_transform(model, cplx(xi, 0.0));
  if (v.error > 1e-11) throw CertificationError("characteristic function accuracy not met", v.error);
  return v.t0;
}

SpectralSample sample_charfn_h(const DensityModel& model, std::span<const double> freqs) {
  SpectralSample s;
  s.freqs.assign(freqs.begin(), freqs.end());
  std::sort(s.freqs.begin(), s.freqs.end());
  s.values.reserve(s.freqs.size());
  for (double xi : s.freqs) {
    if (xi == 0.0) {
      s.values.emplace_back(1.0);
      continue;
    }
    const auto v = tilted_transform(model, cplx(xi, 0.0));
    if (v.error > 1e-11) throw CertificationError("characteristic function accuracy not met", v.error);
    s.abs_tol = std::max(s.abs_tol, v.error);
    s.values.push_back(v.t0);
  }
  s.abs_tol = std::max(s.abs_tol, 1e-14);
  return s;
}

double tilted_mean(const DensityModel& model, double kappa) {
  const auto v = tilted_transform(model, cplx(0.0, kappa));
  return v.t1.real() / v.t0.real();
}

double tilted_variation(const DensityModel& model, double kappa) {
  const DensityModel& f = model.generator();
  require(f.has_derivative(), "total variation needs the model derivative");
  auto dpsi = [&](double v) {
    const double e = kappa == 0.0 ? 1.0 : std::exp(-kappa * v * v);
    return std::abs((f.derivative(v) - 2.0 * kappa * v * f.pdf(v)) * e);
  };
  double V = f.core_half_width();
  if (f.gaussian_rate() > 0.0) V = std::sqrt(60.0 / (f.gaussian_rate() + kappa));
  const double w = 0.125 * f.length_scale();
  const int panels = std::max(1, static_cast<int>(std::ceil(V / w)));
  double tv = quad::integrate(dpsi, 0.0, V, panels) + quad::integrate(dpsi, -V, 0.0, panels);
  if (f.gaussian_rate() <= 0.0) {
    tv += quad::integrate_to_infinity(dpsi, V) + quad::integrate_to_infinity([&](double v) { return dpsi(-v); }, V);
  }
  return tv;
}

double vdc_envelope(double variation, double xi) { return 8.0 * variation / std::sqrt(2.0 * xi); }

}  // namespace levykac
