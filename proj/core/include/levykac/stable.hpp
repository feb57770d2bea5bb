#pragma once

#include <complex>

namespace levykac {

/// Tail data of a law in the domain of attraction of a stable law:
/// the truncated second moment grows like C_S x^{2 - alpha}, and p, q are the
/// limiting right/left tail fractions.
struct SourceLaw {
  double C_S;
  double alpha;
  double p;
  double q;
};

/// Characteristic exponent exp(-sigma |xi|^alpha (1 + i beta sgn(xi) tan(pi alpha / 2))).
struct StableParams {
  double sigma;
  double alpha;
  double beta;
};

void validate(const SourceLaw& src);
void validate(const StableParams& params);

enum class CosineConvention {
  Absolute,  ///< sigma uses |cos(pi alpha / 2)|, which is positive on (1, 2)
  Literal,   ///< sigma uses cos(pi alpha / 2) as is; negative on (1, 2)
};

/// sigma = C_S Gamma(3 - alpha) / (alpha (alpha - 1)) |cos(pi alpha / 2)|, beta = p - q.
/// With CosineConvention::Literal the returned sigma is negative and the result
/// is not a valid parameter set; downstream certifying routines reject it.
StableParams exponent_from_tail(const SourceLaw& src,
                                CosineConvention convention = CosineConvention::Absolute);

/// exp(-sigma |xi|^alpha (1 + i beta sgn(xi) tan(pi alpha / 2))).
std::complex<double> charfn_stable(const StableParams& params, double xi);

/// sigma |xi|^alpha (1 - i beta sgn(xi) tan(pi alpha / 2)): the exponent of the
/// same law written with the transform convention  integral of g(x) e^{i xi x} dx.
std::complex<double> stable_exponent(const StableParams& params, double xi);

/// Density (1/pi) Re integral_0^inf charfn_stable(xi) e^{i xi x} dxi.
/// Large |x| uses the asymptotic series, otherwise Fourier inversion truncated
/// where sigma xi^alpha = 40. Absolute accuracy target 1e-9; throws
/// CertificationError when the quadrature residual exceeds it.
double stable_density(const StableParams& params, double x);

/// Same as stable_density but also reports the residual estimate.
double stable_density(const StableParams& params, double x, double& residual);

/// Gamma(1 + 1/alpha) / (pi sigma^{1/alpha}) Re[(1 + i beta tan(pi alpha / 2))^{-1/alpha}].
double stable_density_at_zero(const StableParams& params);

}  // namespace levykac
