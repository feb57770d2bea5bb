#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace levykac::quad {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rule of order n (cached; n in [2, 64]).
const GaussLegendre& gauss_legendre(int n);

/// A flattened composite rule: integral of g ~ sum_i w_i g(x_i).
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  /// Appends an n-point Gauss-Legendre panel on [a, b].
  void add_panel(double a, double b, int n = 16);

  /// Splits [a, b] into `count` equal panels.
  void add_panels(double a, double b, int count, int n = 16);

  /// Appends panels [a, b] whose widths do not exceed `max_width`.
  void add_bounded(double a, double b, double max_width, int n = 16);

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Panels [a*2^-k-1, a*2^-k] down to a*2^-levels plus [0, a*2^-levels];
/// resolves endpoint singularities of power type at 0.
Rule graded_to_zero(double a, int levels, int n = 16);

/// Integral of f over [a, b] using `panels` Gauss-Legendre panels.
template <class F>
double integrate(F&& f, double a, double b, int panels = 1, int n = 16) {
  const auto& gl = gauss_legendre(n);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double part = 0.0;
    for (int i = 0; i < n; ++i) part += gl.weights[i] * f(mid + 0.5 * h * gl.nodes[i]);
    sum += 0.5 * h * part;
  }
  return sum;
}

/// Integral of f over [a, inf) for integrands with algebraic decay, via x = a/t
/// and dyadic panels in t toward 0. Requires a > 0.
template <class F>
double integrate_to_infinity(F&& f, double a, int levels = 110, int n = 16) {
  const auto& gl = gauss_legendre(n);
  double sum = 0.0;
  double hi = 1.0;
  for (int k = 0; k < levels; ++k) {
    const double lo = 0.5 * hi;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double part = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = mid + half * gl.nodes[i];
      const double x = a / t;
      part += gl.weights[i] * f(x) * (a / (t * t));
    }
    sum += half * part;
    hi = lo;
  }
  return sum;
}

/// Gauss-Kronrod 7-15 on [a, b]; returns the Kronrod value and sets `error`
/// to |K15 - G7|.
template <class F>
double gauss_kronrod15(F&& f, double a, double b, double& error) {
  static constexpr double xk[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = wk[7] * fc;
  double gauss = wg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double fsum = f(c - h * xk[j]) + f(c + h * xk[j]);
    kronrod += wk[j] * fsum;
    if (j % 2 == 1) gauss += wg[j / 2] * fsum;
  }
  error = std::abs((kronrod - gauss) * h);
  return kronrod * h;
}

}  // namespace levykac::quad
