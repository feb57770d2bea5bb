#include "levykac/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "levykac/errors.hpp"
#include "levykac/quadrature.hpp"
#include "levykac/spectral.hpp"

namespace levykac {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBands = 30;
constexpr double kPanelPhase = 6.0;
// Positive tilts stop at kMaxTilt / l^2: the spectrum widens with kappa, and
// points further left only keep absolute accuracy, at densities that are
// already negligible there.
constexpr double kMaxTilt = 256.0;
// sup over x of |integral of e^{i s^2} over (-inf, x)|, rounded up. Integrating
// by parts, |integral of psi(v) e^{i xi v^2}| <= kFresnelSup TV(psi) / sqrt(xi).
constexpr double kFresnelSup = 2.07494;

double chi2_log_density(double n, double u) {
  return (0.5 * n - 1.0) * std::log(u) - 0.5 * u - 0.5 * n * std::log(2.0) - std::lgamma(0.5 * n);
}

// Tilt ladder; index 0 is the untilted contour. Positive tilts double per
// step. Negative tilts (light tails only) grow by half octaves from the same
// start and approach the floor geometrically.
double tilt_of(int index, int N, double floor) {
  const double k0 = 0.25 / std::sqrt(static_cast<double>(N));
  if (index > 0) return std::ldexp(k0, index - 1);
  if (index < 0 && floor < 0.0) {
    const double s = k0 * std::pow(2.0, 0.5 * (-index - 1));
    return floor * s / (s - floor);
  }
  return 0.0;
}

// Chebyshev interpolation of T_0 along the frequency axis. Each transform at
// high frequency is expensive, so the spectrum nodes read T_0 from piecewise
// interpolants that were checked against direct evaluation.
constexpr int kChebDegree = 24;

double cheb_point(int j, double a, double b) {
  return 0.5 * (a + b) + 0.5 * (b - a) * std::cos(kPi * j / kChebDegree);
}

cplx barycentric(const std::vector<cplx>& vals, double a, double b, double x) {
  cplx num = 0.0;
  double den = 0.0;
  for (int j = 0; j <= kChebDegree; ++j) {
    const double d = x - cheb_point(j, a, b);
    if (d == 0.0) return vals[j];
    double w = (j % 2 ? -1.0 : 1.0) / d;
    if (j == 0 || j == kChebDegree) w *= 0.5;
    num += w * vals[j];
    den += w;
  }
  return num / den;
}

struct Piece {
  double a, b;
  std::vector<cplx> vals;  // empty: evaluate directly
};

}  // namespace

struct ConvolutionPower::Level {
  double kappa = 0.0;
  double log_t0 = 0.0;  // log T_0(i kappa)
  double mean = 0.0;    // tilted mean of h
  bool ready = false;
  bool tail_mode = false;
  double log_c = 0.0;   // log(f(0) sqrt(2 pi)) for the subtracted chi-square part
  double cutoff = 0.0;
  double log_discarded = kInf;  // log of the normalised discarded integrand beyond the cutoff
  std::vector<Piece> pieces;  // T_0 along [0, cutoff]
};

struct ConvolutionPower::Spectrum {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<cplx> values;
};

ConvolutionPower::ConvolutionPower(DensityModel model, int N, NfoldOptions options)
    : model_(model.generator()), N_(N), options_(std::move(options)) {
  require(N >= 2, "convolution power needs N >= 2");
  if (options_.params) validate(*options_.params);
}

ConvolutionPower::~ConvolutionPower() = default;

ConvolutionPower::Level& ConvolutionPower::level(int index) const {
  std::lock_guard lock(mutex_);
  auto it = levels_.find(index);
  if (it != levels_.end()) return *it->second;
  auto L = std::make_unique<Level>();
  L->kappa = tilt_of(index, N_, min_tilt(model_));
  const auto t = tilted_transform(model_, cplx(0.0, L->kappa));
  L->log_t0 = std::log(t.t0.real());
  L->mean = t.t1.real() / t.t0.real();
  return *levels_.emplace(index, std::move(L)).first->second;
}

int ConvolutionPower::choose_level(double u) const {
  const double N = N_;
  auto miss = [&](int j) { return std::abs(std::log(u / (N * level(j).mean))); };
  const double center = N * level(0).mean;
  int best = 0;
  if (u < center) {
    const double ell = model_.length_scale();
    for (int j = 1; j < 90; ++j) {
      if (level(j).kappa * ell * ell > kMaxTilt) break;
      if (miss(j) < miss(best)) best = j;
      if (N * level(j).mean <= u) break;
    }
  } else if (u > center && model_.gaussian_rate() > 0.0) {
    for (int j = -1; j > -90; --j) {
      if (miss(j) < miss(best)) best = j;
      if (N * level(j).mean >= u) break;
      if (j < -1 && level(j).mean < (1.0 + 1e-3) * level(j + 1).mean) break;  // saturated near the floor
    }
  }
  return best;
}

std::shared_ptr<const ConvolutionPower::Spectrum> ConvolutionPower::spectrum(int index, double dist) const {
  std::lock_guard lock(mutex_);
  Level& L = level(index);
  const double N = N_;
  const double kappa = L.kappa;
  const DensityModel& f = model_;

  auto log_ratio = [&](double xi) { return std::log(tilted_transform(f, cplx(xi, kappa)).t0) - L.log_t0; };
  auto log_s = [&](double xi) { return L.log_c - 0.5 * std::log(cplx(1.0 + 2.0 * kappa, -2.0 * xi)) - L.log_t0; };
  auto integrand = [&](double xi, bool tail) {
    const cplx g = std::exp(N * log_ratio(xi));
    return tail ? g - std::exp(N * log_s(xi)) : g;
  };

  if (!L.ready) {
    double min_cut = 0.0;
    if (options_.params) min_cut = std::pow(40.0 / (N * options_.params->sigma), 1.0 / options_.params->alpha);
    // Tilting stretches the frequency scale of T_0 by about 1 + 2 kappa l^2.
    const double ell2 = f.length_scale() * f.length_scale();
    const double top = std::max(options_.max_cutoff * std::max(1.0, 1.0 + 2.0 * kappa * ell2), min_cut);
    auto search = [&](bool tail) {
      for (int k = 0;; ++k) {
        const double xi = std::ldexp(1.0, -14) * std::pow(2.0, 0.25 * k);
        if (xi > top) return -1.0;
        if (xi < min_cut) continue;
        const double q = tail ? std::abs(integrand(xi, true)) : std::exp(N * log_ratio(xi).real());
        if (q <= std::exp(-40.0)) return xi;
      }
    };
    const bool eligible = f.has_derivative() && f.symmetric() && f.pdf(0.0) > 0.0;
    if (eligible) L.log_c = std::log(f.pdf(0.0) * std::sqrt(2.0 * kPi));
    double X = search(false);
    if (X < 0.0 && eligible) {
      X = search(true);
      L.tail_mode = X > 0.0;
    }
    if (X < 0.0) X = top;
    L.cutoff = X;

    // Envelope beyond Xi from the Fresnel bound (and one more integration by
    // parts for the subtracted form): integrand <= exp(log_k) xi^{-e} there.
    const double t0 = std::exp(L.log_t0);
    const double tv = tilted_variation(f, kappa);
    const double log_c1 = std::log(kFresnelSup * tv / t0);
    double log_k = -kInf, e = 0.0;
    if (L.tail_mode) {
      // g = (f - f(0) e^{-v^2/2}) e^{-kappa v^2} / v; measure TV(g') on a fine grid.
      const double f0 = f.pdf(0.0);
      auto gprime = [&](double v) {
        const double ek = std::exp(-kappa * v * v);
        const double eg = std::exp(-0.5 * v * v);
        const double phi = (f.pdf(v) - f0 * eg) * ek;
        const double dphi = (f.derivative(v) + f0 * v * eg) * ek - 2.0 * kappa * v * phi;
        return dphi / v - phi / (v * v);
      };
      const double ell = f.length_scale();
      double vmax = f.gaussian_rate() > 0.0 ? std::sqrt(80.0 / (f.gaussian_rate() + std::max(kappa, 0.0))) : 1e4 * ell;
      vmax = std::max(vmax, 40.0 * ell);
      const int n = 40000;
      double tvg = 0.0;
      double prev = gprime(1e-4 * ell);
      for (int i = 1; i <= n; ++i) {
        const double v = 1e-4 * ell * std::pow(vmax / (1e-4 * ell), static_cast<double>(i) / n);
        const double cur = gprime(v);
        tvg += std::abs(cur - prev);
        prev = cur;
      }
      tvg = 1.05 * 2.0 * (tvg + std::abs(prev));
      if (tvg > 0.0) log_k = std::log(N * 0.5 * kFresnelSup * tvg / t0) + (N - 1.0) * log_c1;
      e = 1.0 + 0.5 * N;
    } else {
      log_k = N * log_c1;
      e = 0.5 * N;
    }
    // Logarithm of the envelope integral beyond xi.
    auto log_envelope = [&](double xi) {
      if (log_k == -kInf) return -kInf;
      if (e <= 1.0) return kInf;
      return log_k + (1.0 - e) * std::log(xi) - std::log(e - 1.0);
    };

    // Reference prefactor for the stopping rule: the largest e^{kappa u} T_0^N
    // among points routed to this level.
    double u_ref = N * L.mean;
    if (index != 0) u_ref = N * level(index > 0 ? index - 1 : index + 1).mean;
    const double log_goal = std::log(1e-2 * options_.trust_threshold * kPi) - kappa * u_ref - N * L.log_t0;

    double sampled = 0.0;
    double xi = X;
    double q_prev = std::abs(integrand(xi, L.tail_mode));
    double log_env = log_envelope(xi);
    auto log_sampled = [&] { return sampled > 0.0 ? std::log(sampled) : -kInf; };
    // Once the sampled part alone exceeds the goal the level cannot be trusted,
    // and sampled + env is still a valid bound.
    for (int i = 1; i <= 4 * 24 && log_env > std::max(log_goal, std::log(1e-2) + log_sampled()) &&
                    log_sampled() <= log_goal;
         ++i) {
      const double next = X * std::pow(2.0, 0.25 * i);
      const double q = std::abs(integrand(next, L.tail_mode));
      sampled += (next - xi) * std::max(q, q_prev);
      xi = next;
      q_prev = q;
      log_env = log_envelope(xi);
    }
    const double hi = std::max(log_sampled(), log_env);
    L.log_discarded = !std::isfinite(hi) ? hi : hi + std::log(std::exp(log_sampled() - hi) + std::exp(log_env - hi));
    L.ready = true;
  }

  const int bucket = static_cast<int>(std::ceil(std::log2(std::max(dist, 1.0 / 64.0))));
  const auto key = std::make_pair(index, bucket);
  if (auto it = spectra_.find(key); it != spectra_.end()) return it->second;

  const double D = std::ldexp(1.0, bucket);
  auto rate = [&](double xi) {
    const auto t = tilted_transform(f, cplx(xi, kappa));
    double r = D + N * std::abs(t.t1 / t.t0 - L.mean);
    if (L.tail_mode) r = std::max(r, D + N * std::abs(1.0 / cplx(1.0 + 2.0 * kappa, -2.0 * xi) - L.mean));
    return r;
  };
  auto S = std::make_shared<Spectrum>();
  quad::Rule rule;
  std::vector<double> edges{0.0};
  for (int k = kBands; k >= 0; --k) edges.push_back(std::ldexp(L.cutoff, -k));
  std::vector<double> r(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) r[k] = rate(edges[k]);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], b = edges[k + 1];
    const double rr = std::max(r[k], r[k + 1]);
    const int panels = std::max(1, static_cast<int>(std::ceil(rr * (b - a) / kPanelPhase)));
    rule.add_panels(a, b, panels);
  }
  S->nodes = std::move(rule.nodes);
  S->weights = std::move(rule.weights);
  S->values.resize(S->nodes.size());
  if (L.pieces.empty()) {
    const double tol = std::max(1e-12 / N, 4e-15);
    auto direct = [&](double xi) { return tilted_transform(f, cplx(xi, kappa)).t0; };
    auto build = [&](auto&& self, double a, double b, int depth) -> void {
      Piece p{a, b, std::vector<cplx>(kChebDegree + 1)};
      for (int j = 0; j <= kChebDegree; ++j) p.vals[j] = direct(cheb_point(j, a, b));
      bool ok = true;
      for (double t : {0.31, 0.77}) {
        const double x = a + t * (b - a);
        const cplx d = direct(x);
        if (std::abs(barycentric(p.vals, a, b, x) - d) > tol * std::abs(d)) ok = false;
      }
      if (ok) {
        L.pieces.push_back(std::move(p));
      } else if (depth < 10) {
        self(self, a, 0.5 * (a + b), depth + 1);
        self(self, 0.5 * (a + b), b, depth + 1);
      } else {
        L.pieces.push_back({a, b, {}});
      }
    };
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) build(build, edges[k], edges[k + 1], 0);
  }
  for (std::size_t i = 0; i < S->nodes.size(); ++i) {
    const double xi = S->nodes[i];
    auto it = std::lower_bound(L.pieces.begin(), L.pieces.end() - 1, xi,
                               [](const Piece& p, double x) { return p.b < x; });
    const Piece& p = *it;
    const cplx t = p.vals.empty() ? tilted_transform(f, cplx(xi, kappa)).t0 : barycentric(p.vals, p.a, p.b, xi);
    cplx g = std::exp(N * (std::log(t) - L.log_t0));
    if (L.tail_mode) g -= std::exp(N * log_s(xi));
    S->values[i] = g;
  }
  spectra_.emplace(key, S);
  return S;
}

double ConvolutionPower::circle_formula(double u) const {
  // P(V1^2 + V2^2 in du) / du = (1/2) integral over the circle of radius sqrt(u).
  const double r = std::sqrt(u);
  auto trap = [&](int n) {
    // Compensated sum; plain accumulation loses ~n ulps.
    double s = 0.0, c = 0.0;
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * kPi * i / n;
      const double y = model_.pdf(r * std::cos(th)) * model_.pdf(r * std::sin(th)) - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    return kPi * s / n;
  };
  int n = 256 + 64 * static_cast<int>(std::ceil(r / model_.length_scale()));
  double prev = trap(n);
  while (n < (1 << 22)) {
    n *= 2;
    const double cur = trap(n);
    if (std::abs(cur - prev) <= 1e-14 * std::abs(cur)) return cur;
    prev = cur;
  }
  throw CertificationError("circle quadrature did not converge", std::abs(prev));
}

NfoldResult ConvolutionPower::evaluate(std::span<const double> us) const {
  NfoldResult out;
  out.values.assign(us.size(), 0.0);
  const double N = N_;
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < us.size(); ++i) {
    const double u = us[i];
    require(std::isfinite(u), "convolution points must be finite");
    if (u < 0.0 || (u == 0.0 && N_ >= 3)) continue;
    if (N_ == 2) {
      out.values[i] = circle_formula(u);
      continue;
    }
    groups[choose_level(u)].push_back(i);
  }
  for (const auto& [index, members] : groups) {
    const Level& L = level(index);
    double dist = 0.0;
    for (std::size_t i : members) dist = std::max(dist, std::abs(us[i] - N * L.mean));
    const auto S = spectrum(index, dist);
    out.xi_max = std::max(out.xi_max, L.cutoff);
    for (std::size_t i : members) {
      const double u = us[i];
      double sum = 0.0;
      for (std::size_t j = 0; j < S->nodes.size(); ++j) {
        const double ph = S->nodes[j] * u;
        sum += S->weights[j] * (S->values[j].real() * std::cos(ph) + S->values[j].imag() * std::sin(ph));
      }
      const double pref = std::exp(L.kappa * u + N * L.log_t0);
      double v = pref * sum / kPi;
      if (L.tail_mode) v += std::exp(N * L.log_c + chi2_log_density(N, u));
      out.values[i] = v;
      if (L.log_discarded > -kInf) {
        const double bound = std::exp(L.kappa * u + N * L.log_t0 + L.log_discarded) / kPi;
        out.highfreq_bound = std::max(out.highfreq_bound, bound);
      }
    }
  }
  out.trusted = out.highfreq_bound < options_.trust_threshold;
  if (!out.trusted && !options_.force) {
    throw CertificationError("untrusted cutoff", out.highfreq_bound);
  }
  return out;
}

double ConvolutionPower::operator()(double u) const {
  const double p[1] = {u};
  return evaluate(p).values[0];
}

NfoldResult nfold_density(const DensityModel& model, int N, std::span<const double> u,
                          const NfoldOptions& options) {
  return ConvolutionPower(model, N, options).evaluate(u);
}

}  // namespace levykac
