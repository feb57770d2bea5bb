#pragma once

#include <complex>
#include <span>
#include <vector>

#include "levykac/densities.hpp"

namespace levykac {

/// Characteristic-function values on a frequency set.
struct SpectralSample {
  std::vector<double> freqs;
  std::vector<std::complex<double>> values;
  double abs_tol = 0.0;
};

/// T_m(zeta) = integral of f(v) v^{2m} e^{i zeta v^2} dv for complex zeta with
/// Im zeta >= 0, or Im zeta > -rate for Gaussian-type generators. This is the
/// transform of the squared law tilted by e^{-Im(zeta) u}, weighted by u^m.
struct TiltedValue {
  std::complex<double> t0;
  std::complex<double> t1;
  double error;
};

TiltedValue tilted_transform(const DensityModel& model, std::complex<double> zeta);

/// h-hat(xi) = integral of h(u) e^{i xi u} du = integral of f(v) e^{i xi v^2} dv.
/// The model may be a generator or a squared law; the generator is used.
/// Throws CertificationError if the quadrature error estimate exceeds 1e-11.
std::complex<double> charfn_h(const DensityModel& model, double xi);

SpectralSample sample_charfn_h(const DensityModel& model, std::span<const double> freqs);

/// Tilted mean of the squared law: T_1(i kappa) / T_0(i kappa).
double tilted_mean(const DensityModel& model, double kappa);

/// Total variation of f(v) e^{-kappa v^2} over the line.
double tilted_variation(const DensityModel& model, double kappa);

/// Van der Corput envelope: |T_0(xi + i kappa)| <= 8 (2 xi)^{-1/2} TV(f e^{-kappa v^2}).
double vdc_envelope(double variation, double xi);

/// Smallest admissible tilt for the model (0 for algebraic tails).
double min_tilt(const DensityModel& model);

}  // namespace levykac
