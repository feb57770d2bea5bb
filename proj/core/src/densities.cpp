#include "levykac/densities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "levykac/errors.hpp"
#include "levykac/quadrature.hpp"

namespace levykac {
namespace {

constexpr double kPi = std::numbers::pi;

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <class F>
double bounded(F&& f, double a, double b, double max_width) {
  if (b <= a) return 0.0;
  const int count = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
  return quad::integrate(f, a, b, count);
}

bool heavy(const DensityModel& m) { return m.gaussian_rate() <= 0.0; }

// Integral of F over the line for a generator model. F already contains f.
template <class F>
double line_integral(const DensityModel& gen, F&& F_, int refine = 1) {
  const double V = gen.core_half_width();
  const double w = 0.25 * gen.length_scale() / refine;
  double sum = bounded(F_, -V, 0.0, w) + bounded(F_, 0.0, V, w);
  if (heavy(gen)) {
    sum += quad::integrate_to_infinity(F_, V);
    sum += quad::integrate_to_infinity([&](double x) { return F_(-x); }, V);
  }
  return sum;
}

// Integral of |x|^m times the tail expansion over [a, inf); +inf if divergent.
double expansion_moment(const TailExpansion& t, double m, double a) {
  double sum = 0.0;
  for (std::size_t k = 0; k < t.coeff.size(); ++k) {
    const double e = t.power[k] - m - 1.0;
    if (e <= 0.0) return std::numeric_limits<double>::infinity();
    sum += t.coeff[k] * std::pow(a, -e) / e;
  }
  return sum;
}

// Integral of |x|^m f(x) over [0, X] (side = +1) or [-X, 0] (side = -1).
double half_truncated(const DensityModel& gen, double m, double X, int side) {
  const double V = gen.core_half_width();
  const double w = 0.25 * gen.length_scale();
  auto g = [&](double x) { return std::pow(x, m) * gen.pdf(side * x); };
  // Panel edges do not depend on X, so the result is nondecreasing in X.
  double sum = 0.0;
  const double body = std::min(X, V);
  for (double a = 0.0; a < body; a += w) sum += quad::integrate(g, a, std::min(a + w, body));
  if (!heavy(gen)) return sum;
  for (double a = V; a < X; a *= 2.0) sum += quad::integrate(g, a, std::min(2.0 * a, X));
  return sum;
}

// Integral of f over [a, inf) for a >= 0 (side = +1), or over (-inf, -a].
double half_tail(const DensityModel& gen, double a, int side) {
  auto g = [&](double x) { return gen.pdf(side * x); };
  const double w = 0.25 * gen.length_scale();
  if (!heavy(gen)) {
    const double hi = std::sqrt(a * a + 60.0 / gen.gaussian_rate());
    return bounded(g, a, hi, w);
  }
  const double V = gen.core_half_width();
  if (const auto& t = gen.tail_expansion()) {
    if (a >= V) return expansion_moment(*t, 0.0, a);
    return bounded(g, a, V, w) + expansion_moment(*t, 0.0, V);
  }
  if (a >= V) return quad::integrate_to_infinity(g, std::max(a, 1e-300));
  return bounded(g, a, V, w) + quad::integrate_to_infinity(g, V);
}

// Full moment of order m (integer >= 0) of a generator, with closed-form tails.
double generator_moment(const DensityModel& gen, int m, int refine) {
  auto pw = [m](double x) { return m == 0 ? 1.0 : std::pow(x, m); };
  const auto& t = gen.tail_expansion();
  if (!heavy(gen) || !t) {
    return line_integral(gen, [&](double x) { return pw(x) * gen.pdf(x); }, refine);
  }
  const double V = t->start;
  const double w = 0.25 * gen.length_scale() / refine;
  auto g = [&](double x) { return pw(x) * gen.pdf(x); };
  const double tail = expansion_moment(*t, m, V);
  if (std::isinf(tail)) return tail;
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return bounded(g, -V, 0.0, w) + bounded(g, 0.0, V, w) + (1.0 + sign) * tail;
}

double certified_moment(const DensityModel& gen, int m) {
  const double coarse = generator_moment(gen, m, 1);
  if (std::isinf(coarse)) return coarse;
  const double fine = generator_moment(gen, m, 2);
  const double residual = std::abs(fine - coarse);
  if (residual > 1e-10 * std::max(1.0, std::abs(fine))) {
    throw CertificationError("moment quadrature did not converge for " + gen.name(), residual);
  }
  return fine;
}

TailExpansion alternating_expansion(double start, double amplitude, double scale, double p) {
  // amplitude / (1 + |x/scale|^p) for |x| > scale, as a convergent series.
  TailExpansion t{start, {}, {}};
  const double ratio = std::pow(scale / start, p);
  double term = 1.0;
  for (int k = 0; k < 64 && term > 1e-19; ++k) {
    t.coeff.push_back((k % 2 == 0 ? 1.0 : -1.0) * amplitude * std::pow(scale, p * (k + 1)));
    t.power.push_back(p * (k + 1));
    term *= ratio;
  }
  return t;
}

DensityModel make_gauss(double a) {
  require(a > 0.0 && std::isfinite(a), "gauss scale must be positive");
  const double norm = 1.0 / (a * std::sqrt(2.0 * kPi));
  DensityModel::Definition d;
  d.name = a == 1.0 ? "gauss" : "gauss(" + short_number(a) + ")";
  d.pdf = [a, norm](double x) { return norm * std::exp(-0.5 * x * x / (a * a)); };
  d.log_pdf = [a, norm](double x) { return std::log(norm) - 0.5 * x * x / (a * a); };
  d.derivative = [a, norm](double x) { return -x / (a * a) * norm * std::exp(-0.5 * x * x / (a * a)); };
  d.gaussian_rate = 0.5 / (a * a);
  d.length_scale = a;
  d.normalization_scale = a;
  d.unit_energy = a == 1.0;
  return DensityModel(std::move(d));
}

DensityModel make_power_tail(double alpha, const std::string& name) {
  require(alpha > 1.0 && alpha < 2.0, "power-tail requires alpha in (1, 2)");
  const double p = 1.0 + 2.0 * alpha;
  const double c = p * std::sin(kPi / p) / (2.0 * kPi);
  const double s = std::sqrt(std::sin(3.0 * kPi / p) / std::sin(kPi / p));
  const double amp = c / s;
  DensityModel::Definition d;
  d.name = name;
  d.pdf = [=](double x) { return amp / (1.0 + std::pow(std::abs(x / s), p)); };
  d.log_pdf = [=](double x) { return std::log(amp) - std::log1p(std::pow(std::abs(x / s), p)); };
  d.derivative = [=](double x) {
    const double y = std::abs(x / s);
    const double den = 1.0 + std::pow(y, p);
    const double g = -amp * p * std::pow(y, p - 1.0) / (den * den) / s;
    return x < 0.0 ? -g : g;
  };
  d.analytic_tail = AnalyticTail{c * std::pow(s, p - 1.0), alpha};
  d.tail_expansion = alternating_expansion(2.0 * s, amp, s, p);
  d.length_scale = s;
  d.normalization_scale = s;
  d.unit_energy = true;
  return DensityModel(std::move(d));
}

DensityModel make_quartic() {
  const double D = std::numbers::sqrt2 / kPi;
  DensityModel::Definition d;
  d.name = "quartic";
  d.pdf = [D](double x) { return D / (1.0 + x * x * x * x); };
  d.log_pdf = [D](double x) { return std::log(D) - std::log1p(x * x * x * x); };
  d.derivative = [D](double x) {
    const double den = 1.0 + x * x * x * x;
    return -4.0 * D * x * x * x / (den * den);
  };
  d.analytic_tail = AnalyticTail{D, 1.5};
  d.tail_expansion = alternating_expansion(2.0, D, 1.0, 4.0);
  d.unit_energy = true;
  return DensityModel(std::move(d));
}

DensityModel make_mixture(double delta) {
  require(delta > 0.0 && delta < 1.0, "mixture requires delta in (0, 1)");
  // Centred Gaussians with variances 1/(2 delta) and 1/(2 (1 - delta)).
  const double w[2] = {delta, 1.0 - delta};
  const double T[2] = {0.5 / delta, 0.5 / (1.0 - delta)};
  auto comp = [=](int i, double x) {
    return std::exp(-0.5 * x * x / T[i]) / std::sqrt(2.0 * kPi * T[i]);
  };
  DensityModel::Definition d;
  d.name = "mixture(" + short_number(delta) + ")";
  d.pdf = [=](double x) { return w[0] * comp(0, x) + w[1] * comp(1, x); };
  d.log_pdf = [=](double x) {
    double l[2];
    for (int i = 0; i < 2; ++i) l[i] = std::log(w[i]) - 0.5 * x * x / T[i] - 0.5 * std::log(2.0 * kPi * T[i]);
    const double m = std::max(l[0], l[1]);
    return m + std::log(std::exp(l[0] - m) + std::exp(l[1] - m));
  };
  d.derivative = [=](double x) { return -x * (w[0] * comp(0, x) / T[0] + w[1] * comp(1, x) / T[1]); };
  d.gaussian_rate = std::min(delta, 1.0 - delta);
  d.length_scale = std::sqrt(std::min(T[0], T[1]));
  d.unit_energy = true;
  return DensityModel(std::move(d));
}

double param(const ParameterMap& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void only_keys(const ParameterMap& params, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (const char* allowed : keys) ok = ok || k == allowed;
    require(ok, "unknown model parameter '" + k + "'");
  }
}

}  // namespace

double TailExpansion::operator()(double abs_x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < coeff.size(); ++k) sum += coeff[k] * std::pow(abs_x, -power[k]);
  return sum;
}

DensityModel::DensityModel(Definition def)
    : def_(std::make_shared<const Definition>(std::move(def))) {
  require(static_cast<bool>(def_->pdf), "density model needs a pdf");
  require(def_->length_scale > 0.0, "length scale must be positive");
}

double DensityModel::log_pdf(double x) const {
  if (def_->log_pdf) return def_->log_pdf(x);
  return std::log(def_->pdf(x));
}

double DensityModel::derivative(double x) const {
  if (!def_->derivative) {
    throw PreconditionError("model '" + name() + "' has no derivative; supply one explicitly");
  }
  return def_->derivative(x);
}

double DensityModel::core_half_width() const {
  if (def_->tail_expansion) return def_->tail_expansion->start;
  if (def_->gaussian_rate > 0.0) return std::sqrt(60.0 / def_->gaussian_rate);
  return 8.0 * def_->length_scale;
}

DensityModel make_model(const std::string& name, const ParameterMap& params) {
  if (name == "gauss") {
    only_keys(params, {"scale"});
    return make_gauss(param(params, "scale", 1.0));
  }
  if (name == "quartic") {
    only_keys(params, {});
    return make_quartic();
  }
  if (name == "power-tail") {
    only_keys(params, {"alpha"});
    const double alpha = param(params, "alpha", 1.5);
    return make_power_tail(alpha, "power-tail(" + short_number(alpha) + ")");
  }
  if (name == "mixture") {
    only_keys(params, {"delta"});
    const auto it = params.find("delta");
    require(it != params.end(), "mixture requires a delta parameter");
    return make_mixture(it->second);
  }
  throw PreconditionError("unknown model '" + name + "'");
}

DensityModel parse_model(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos) return make_model(spec);
  require(spec.back() == ')', "malformed model specification '" + spec + "'");
  const std::string name = spec.substr(0, open);
  const std::string arg = spec.substr(open + 1, spec.size() - open - 2);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(arg, &used);
    require(used == arg.size(), "malformed model parameter '" + arg + "'");
  } catch (const std::logic_error&) {
    throw PreconditionError("malformed model parameter '" + arg + "'");
  }
  if (name == "gauss") return make_model(name, {{"scale", value}});
  if (name == "power-tail") return make_model(name, {{"alpha", value}});
  if (name == "mixture") return make_model(name, {{"delta", value}});
  throw PreconditionError("model '" + name + "' takes no parameter");
}

DensityModel h_of(const DensityModel& model) {
  const DensityModel& gen = model.generator();
  require(!model.is_squared_law(), "h_of expects a generator density");
  auto g = std::make_shared<const DensityModel>(gen);
  DensityModel::Definition d;
  d.name = "h[" + gen.name() + "]";
  d.pdf = [g](double u) {
    if (u <= 0.0) return 0.0;
    const double r = std::sqrt(u);
    return (g->pdf(r) + g->pdf(-r)) / (2.0 * r);
  };
  if (gen.has_derivative()) {
    d.derivative = [g](double u) {
      if (u <= 0.0) return 0.0;
      const double r = std::sqrt(u);
      const double dg = (g->derivative(r) - g->derivative(-r)) / (2.0 * r) -
                        (g->pdf(r) + g->pdf(-r)) / (2.0 * r * r);
      return dg / (2.0 * r);
    };
  }
  d.support = Interval{0.0, std::numeric_limits<double>::infinity()};
  if (const auto& t = gen.tail_expansion()) {
    TailExpansion tu{t->start * t->start, t->coeff, {}};
    for (double pk : t->power) tu.power.push_back(0.5 * (pk + 1.0));
    d.tail_expansion = std::move(tu);
  }
  d.length_scale = gen.length_scale() * gen.length_scale();
  d.symmetric = false;
  DensityModel h(std::move(d));
  h.generator_ = std::move(g);
  return h;
}

double integrate_against(const DensityModel& model, const std::function<double(double)>& g) {
  const DensityModel& gen = model.generator();
  if (model.is_squared_law()) {
    return line_integral(gen, [&](double v) { return g(v * v) * gen.pdf(v); });
  }
  return line_integral(gen, [&](double x) { return g(x) * gen.pdf(x); });
}

MomentSummary moments(const DensityModel& model) {
  const DensityModel& gen = model.generator();
  MomentSummary s{};
  const double inf = std::numeric_limits<double>::infinity();
  const double m2 = certified_moment(gen, 2);
  if (model.is_squared_law()) {
    s.mass = certified_moment(gen, 0);
    s.mean = m2;
    s.second_moment = certified_moment(gen, 4);
    s.fourth_moment = certified_moment(gen, 8);
    s.fourth_moment_infinite = std::isinf(s.fourth_moment);
  } else {
    s.mass = certified_moment(gen, 0);
    s.mean = certified_moment(gen, 1);
    s.second_moment = m2;
    s.fourth_moment_infinite = gen.analytic_tail().has_value() && gen.analytic_tail()->alpha < 2.0;
    s.fourth_moment = s.fourth_moment_infinite ? inf : certified_moment(gen, 4);
  }
  s.E = m2;
  return s;
}

double truncated_moment(const DensityModel& model, double order, double X) {
  require(X > 0.0, "truncation window must be positive");
  const DensityModel& gen = model.generator();
  if (model.is_squared_law()) {
    const double r = std::sqrt(X);
    return half_truncated(gen, 2.0 * order, r, 1) + half_truncated(gen, 2.0 * order, r, -1);
  }
  return half_truncated(gen, order, X, 1) + half_truncated(gen, order, X, -1);
}

double nu_f(const DensityModel& model, double x) {
  require(x > 0.0, "nu_f needs x > 0");
  const DensityModel& gen = model.generator();
  const double r = std::sqrt(x);
  return half_truncated(gen, 4.0, r, 1) + half_truncated(gen, 4.0, r, -1);
}

TailLaw estimate_tail_law(const DensityModel& model, double x_min, double x_max, int n_points) {
  require(x_min > 0.0 && x_min < x_max, "tail window must satisfy 0 < x_min < x_max");
  require(n_points >= 8, "tail fit needs at least 8 points");
  std::vector<double> lx(n_points), ly(n_points);
  const double step = std::log(x_max / x_min) / (n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    lx[i] = std::log(x_min) + i * step;
    ly[i] = std::log(nu_f(model, std::exp(lx[i])));
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n_points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n_points;
  my /= n_points;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < n_points; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double residual = 0.0;
  for (int i = 0; i < n_points; ++i) {
    residual = std::max(residual, std::abs(ly[i] - intercept - slope * lx[i]));
  }
  TailLaw law{std::exp(intercept), 2.0 - slope, {x_min, x_max}, residual, 0.0, 0.0};
  if (residual > 0.05 || !(law.alpha > 1.0 && law.alpha < 2.0 - 1e-6)) {
    throw CertificationError("not regularly varying in window", residual);
  }
  const DensityModel sq = model.is_squared_law() ? model : h_of(model);
  std::tie(law.p, law.q) = skew_fractions(sq, x_max);
  return law;
}

double upper_tail_mass(const DensityModel& model, double a) {
  const DensityModel& gen = model.generator();
  if (model.is_squared_law()) {
    if (a <= 0.0) return 1.0;
    const double r = std::sqrt(a);
    return half_tail(gen, r, 1) + half_tail(gen, r, -1);
  }
  if (a < 0.0) return 1.0 - half_tail(gen, -a, -1);
  return half_tail(gen, a, 1);
}

double lower_tail_mass(const DensityModel& model, double a) {
  const DensityModel& gen = model.generator();
  if (model.is_squared_law()) {
    if (a >= 0.0) return 0.0;
    return 1.0 - upper_tail_mass(model, -a);
  }
  if (a < 0.0) return 1.0 - half_tail(gen, -a, 1);
  return half_tail(gen, a, -1);
}

std::pair<double, double> skew_fractions(const DensityModel& model, double x) {
  require(x > 0.0, "skew_fractions needs x > 0");
  const double up = upper_tail_mass(model, x);
  const double lo = lower_tail_mass(model, x);
  const double den = up + lo;
  if (!(den >= 1e-300)) throw CertificationError("degenerate tail", den);
  return {up / den, lo / den};
}

}  // namespace levykac
