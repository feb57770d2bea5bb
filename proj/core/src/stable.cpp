#include "levykac/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "levykac/errors.hpp"
#include "levykac/quadrature.hpp"

namespace levykac {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kTarget = 1e-9;

double tan_half(double alpha) { return std::tan(0.5 * kPi * alpha); }

// Asymptotic expansion in |x|^{-alpha k - 1}. Returns false when the smallest
// term is not negligible against the leading one.
bool series_density(const StableParams& s, double x, double& value, double& residual) {
  const cplx zeta = s.sigma * cplx(1.0, s.beta * tan_half(s.alpha));
  const double lz = std::log(std::abs(zeta));
  const double az = std::arg(-zeta);
  const double lx = std::log(std::abs(x));
  const double dir = x > 0.0 ? 1.0 : -1.0;
  double sum = 0.0;
  double lead = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 400; ++k) {
    const double e = s.alpha * k + 1.0;
    const double logm = std::lgamma(e) - std::lgamma(k + 1.0) + k * lz - e * lx - std::log(kPi);
    const double m = std::exp(logm);
    if (k == 1) lead = m;
    if (m > prev) break;
    prev = m;
    sum += m * std::cos(k * az + dir * 0.5 * kPi * e);
    if (m < 1e-15 * lead) {
      value = sum;
      residual = m;
      return true;
    }
  }
  return false;
}

// Filon panel: integral of g(t) e^{i w t} over [-1, 1], g given at Chebyshev
// points of the given degree and interpolated by a polynomial.
cplx filon_panel(const std::vector<cplx>& g_cheb, double w) {
  const int n = static_cast<int>(g_cheb.size()) - 1;
  // Monomial coefficients of the interpolant via Newton divided differences.
  std::vector<double> t(n + 1);
  for (int j = 0; j <= n; ++j) t[j] = std::cos(kPi * (2.0 * j + 1.0) / (2.0 * (n + 1)));
  std::vector<cplx> dd(g_cheb);
  for (int l = 1; l <= n; ++l)
    for (int j = n; j >= l; --j) dd[j] = (dd[j] - dd[j - 1]) / (t[j] - t[j - l]);
  std::vector<cplx> coef(n + 1, 0.0);
  for (int j = n; j >= 0; --j) {
    for (int l = n; l >= 1; --l) coef[l] = coef[l - 1] - t[j] * coef[l];
    coef[0] = dd[j] - t[j] * coef[0];
  }
  // Moments mu_j = integral t^j e^{i w t} over [-1, 1].
  std::vector<cplx> mu(n + 1);
  if (std::abs(w) < 2.0 * n + 10.0) {
    const auto& gl = quad::gauss_legendre(64);
    for (int j = 0; j <= n; ++j) {
      cplx s = 0.0;
      for (int i = 0; i < 64; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], j) * std::polar(1.0, w * gl.nodes[i]);
      mu[j] = s;
    }
  } else {
    const cplx iw(0.0, w);
    const cplx ep = std::polar(1.0, w), em = std::polar(1.0, -w);
    mu[0] = (ep - em) / iw;
    for (int j = 1; j <= n; ++j) {
      const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
      mu[j] = (ep - sgn * em) / iw - (static_cast<double>(j) / iw) * mu[j - 1];
    }
  }
  cplx sum = 0.0;
  for (int j = 0; j <= n; ++j) sum += coef[j] * mu[j];
  return sum;
}

double fourier_density(const StableParams& s, double x, double& residual) {
  const cplx zeta = s.sigma * cplx(1.0, s.beta * tan_half(s.alpha));
  auto g = [&](double xi) { return std::exp(-zeta * std::pow(xi, s.alpha)); };
  auto f = [&](double xi) { return (g(xi) * std::polar(1.0, xi * x)).real(); };
  const double xi_max = std::pow(40.0 / s.sigma, 1.0 / s.alpha);

  std::vector<double> edges{0.0};
  const double graded_top = xi_max / 32.0;
  for (int k = 40; k >= 0; --k) edges.push_back(std::ldexp(graded_top, -k));
  const int uniform = 31;
  for (int k = 1; k <= uniform; ++k) edges.push_back(graded_top + k * (xi_max - graded_top) / uniform);

  double sum = 0.0;
  residual = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    const double h = b - a;
    if (std::abs(x) * h > 8.0) {
      const double mid = 0.5 * (a + b), half = 0.5 * h;
      cplx v[2];
      int deg[2] = {10, 14};
      for (int r = 0; r < 2; ++r) {
        std::vector<cplx> samples(deg[r] + 1);
        for (int j = 0; j <= deg[r]; ++j) {
          const double tj = std::cos(kPi * (2.0 * j + 1.0) / (2.0 * (deg[r] + 1)));
          samples[j] = g(mid + half * tj);
        }
        v[r] = half * std::polar(1.0, mid * x) * filon_panel(samples, half * x);
      }
      sum += v[1].real();
      residual += std::abs(v[1].real() - v[0].real());
    } else {
      // Split oscillating panels so each GK15 piece spans at most ~3 rad.
      const double rate = std::abs(x) + std::abs(zeta.imag()) * s.alpha * std::pow(b, s.alpha - 1.0);
      const int pieces = std::max(1, static_cast<int>(std::ceil(rate * h / 3.0)));
      for (int q = 0; q < pieces; ++q) {
        double err = 0.0;
        sum += quad::gauss_kronrod15(f, a + q * h / pieces, a + (q + 1) * h / pieces, err);
        residual += err;
      }
    }
  }
  residual /= kPi;
  return sum / kPi;
}

}  // namespace

void validate(const SourceLaw& src) {
  require(src.C_S > 0.0 && std::isfinite(src.C_S), "source law needs C_S > 0");
  require(src.alpha > 1.0 && src.alpha < 2.0, "source law needs alpha in (1, 2)");
  require(src.p >= 0.0 && src.q >= 0.0 && std::abs(src.p + src.q - 1.0) < 1e-12,
          "source law needs p, q >= 0 with p + q = 1");
}

void validate(const StableParams& params) {
  require(params.sigma > 0.0 && std::isfinite(params.sigma), "stable law needs sigma > 0");
  require(params.alpha > 1.0 && params.alpha < 2.0, "stable law needs alpha in (1, 2)");
  require(std::abs(params.beta) <= 1.0, "stable law needs |beta| <= 1");
}

StableParams exponent_from_tail(const SourceLaw& src, CosineConvention convention) {
  validate(src);
  const double a = src.alpha;
  double c = std::cos(0.5 * kPi * a);
  if (convention == CosineConvention::Absolute) c = std::abs(c);
  return {src.C_S * std::tgamma(3.0 - a) / (a * (a - 1.0)) * c, a, src.p - src.q};
}

std::complex<double> charfn_stable(const StableParams& params, double xi) {
  validate(params);
  if (xi == 0.0) return 1.0;
  const double sgn = xi > 0.0 ? 1.0 : -1.0;
  const cplx e = params.sigma * std::pow(std::abs(xi), params.alpha) *
                 cplx(1.0, params.beta * sgn * tan_half(params.alpha));
  return std::exp(-e);
}

std::complex<double> stable_exponent(const StableParams& params, double xi) {
  if (xi == 0.0) return 0.0;
  const double sgn = xi > 0.0 ? 1.0 : -1.0;
  return params.sigma * std::pow(std::abs(xi), params.alpha) *
         cplx(1.0, -params.beta * sgn * tan_half(params.alpha));
}

double stable_density(const StableParams& params, double x, double& residual) {
  validate(params);
  double value = 0.0;
  if (x != 0.0 && series_density(params, x, value, residual)) return value;
  value = fourier_density(params, x, residual);
  if (!(residual <= kTarget)) {
    throw CertificationError("stable density quadrature did not converge", residual);
  }
  return value;
}

double stable_density(const StableParams& params, double x) {
  double residual = 0.0;
  return stable_density(params, x, residual);
}

double stable_density_at_zero(const StableParams& params) {
  validate(params);
  const cplx z = std::pow(cplx(1.0, params.beta * tan_half(params.alpha)), -1.0 / params.alpha);
  return std::tgamma(1.0 + 1.0 / params.alpha) / (kPi * std::pow(params.sigma, 1.0 / params.alpha)) * z.real();
}

}  // namespace levykac
