#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace levykac {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// f(x) ~ amplitude / |x|^(1 + 2 alpha) as |x| -> infinity.
struct AnalyticTail {
  double amplitude;
  double alpha;
};

/// Convergent expansion f(x) = sum_k coeff[k] |x|^(-power[k]) valid for
/// |x| >= start. The leading term is the analytic tail.
struct TailExpansion {
  double start;
  std::vector<double> coeff;
  std::vector<double> power;

  double operator()(double abs_x) const;
};

/// An immutable probability density on the line.
///
/// Generator densities f are registered through make_model(); the law of V^2
/// for V ~ f is obtained with h_of(). Squared laws keep a handle on their
/// generator so that every integral against h can be rewritten as an integral
/// against f (u = v^2), which removes the u^{-1/2} singularity at the origin.
class DensityModel {
 public:
  using Fn = std::function<double(double)>;

  struct Definition {
    std::string name;
    Fn pdf;
    Fn log_pdf;     ///< optional; defaults to log(pdf)
    Fn derivative;  ///< optional
    Interval support;
    std::optional<AnalyticTail> analytic_tail;
    std::optional<TailExpansion> tail_expansion;
    /// f(x) <= C exp(-rate x^2) for large |x| when positive; 0 for algebraic tails.
    double gaussian_rate = 0.0;
    /// Scale on which f varies; used to size quadrature panels.
    double length_scale = 1.0;
    double normalization_scale = 1.0;
    bool unit_energy = false;
    bool symmetric = true;
  };

  explicit DensityModel(Definition def);

  const std::string& name() const { return def_->name; }
  double pdf(double x) const { return def_->pdf(x); }
  double log_pdf(double x) const;
  bool has_derivative() const { return static_cast<bool>(def_->derivative); }
  double derivative(double x) const;
  const Interval& support() const { return def_->support; }
  const std::optional<AnalyticTail>& analytic_tail() const { return def_->analytic_tail; }
  const std::optional<TailExpansion>& tail_expansion() const { return def_->tail_expansion; }
  double gaussian_rate() const { return def_->gaussian_rate; }
  double length_scale() const { return def_->length_scale; }
  double normalization_scale() const { return def_->normalization_scale; }
  bool unit_energy() const { return def_->unit_energy; }
  bool symmetric() const { return def_->symmetric; }

  /// Half-width of the region treated by plain panels: beyond it the density
  /// is either negligible (Gaussian decay) or given by its tail expansion.
  double core_half_width() const;

  bool is_squared_law() const { return generator_ != nullptr; }
  /// The generator f of a squared law; the model itself otherwise.
  const DensityModel& generator() const { return generator_ ? *generator_ : *this; }

 private:
  friend DensityModel h_of(const DensityModel& model);

  std::shared_ptr<const Definition> def_;
  std::shared_ptr<const DensityModel> generator_;
};

using ParameterMap = std::map<std::string, double>;

/// Registry of generator densities: "gauss" (optional "scale"), "quartic",
/// "power-tail" ("alpha" in (1,2)) and "mixture" ("delta" in (0,1)).
DensityModel make_model(const std::string& name, const ParameterMap& params = {});

/// Parses "quartic", "gauss", "gauss(1.2)", "power-tail(1.5)", "mixture(0.3)".
DensityModel parse_model(const std::string& spec);

/// Density of V^2 for V ~ model: h(u) = (f(sqrt u) + f(-sqrt u)) / (2 sqrt u).
DensityModel h_of(const DensityModel& model);

/// Integral of g(x) f(x) over the support of the model. For squared laws the
/// integral is carried out against the generator (g(v^2) f(v) dv).
double integrate_against(const DensityModel& model, const std::function<double(double)>& g);

struct MomentSummary {
  double mass;
  double mean;
  double second_moment;
  double fourth_moment;  ///< +inf when fourth_moment_infinite
  bool fourth_moment_infinite;
  double E;  ///< mean of the squared variable
};

MomentSummary moments(const DensityModel& model);

/// Integral of |x|^order f(x) over [-X, X].
double truncated_moment(const DensityModel& model, double order, double X);

/// nu_f(x) = integral of y^4 f(y) over |y| <= sqrt(x); for a squared law this
/// is the truncated second moment of h on [0, x].
double nu_f(const DensityModel& model, double x);

struct TailLaw {
  double C_S;
  double alpha;
  std::pair<double, double> fit_window;
  double residual;
  double p;
  double q;
};

/// Log-log least-squares fit of nu_f on geometric points in [x_min, x_max].
/// Throws CertificationError when the data is not regularly varying with an
/// exponent in (1, 2).
TailLaw estimate_tail_law(const DensityModel& model, double x_min, double x_max,
                          int n_points = 32);

/// P(X > a) and P(X < -a).
double upper_tail_mass(const DensityModel& model, double a);
double lower_tail_mass(const DensityModel& model, double a);

/// ((1 - F(x)) / (1 - F(x) + F(-x)), F(-x) / (1 - F(x) + F(-x))).
std::pair<double, double> skew_fractions(const DensityModel& model, double x);

}  // namespace levykac
