#pragma once

#include <complex>

#include "levykac/densities.hpp"
#include "levykac/stable.hpp"

namespace levykac {

/// Measured local-CLT error for one N.
struct ConvergenceRecord {
  int N = 0;
  /// N^{1/alpha} sup_u |h^{*N}(u) - gamma((u - N E) / N^{1/alpha}) / N^{1/alpha}|.
  double sup_err = 0.0;
  /// N^{1/alpha} h^{*N}(N E) / gamma(0).
  double gamma0_ratio = 0.0;
  double xi_max = 0.0;
  double highfreq_bound = 0.0;
  double tau = 0.0;
  /// Low/high frequency split N^{-1/(2 + 2 tau)}.
  double beta_N = 0.0;
  bool trusted = false;
};

/// Remainder modulus sampled on (beta / 100, beta].
struct RemainderProbe {
  double beta = 0.0;
  double omega = 0.0;
  int n_samples = 0;
};

struct CltOptions {
  double tau = 0.1;
  /// The sup is taken over 2^grid_pow points.
  int grid_pow = 11;
  /// Accept untrusted frequency cutoffs (the record is marked untrusted).
  bool force = false;
};

/// Sup-norm distance between h^{*N} and the rescaled stable density over
/// [N E - 8 N^{1/alpha}, N E + 12 N^{1/alpha}]. The model may be a generator f
/// or its squared law. A negative sigma (the literal cosine convention) is a
/// CertificationError("non-contracting exponent").
ConvergenceRecord clt_sup_error(const DensityModel& model, int N, const StableParams& params,
                                const CltOptions& options = {});

/// eta = 1 - sup over |xi| >= beta of |h-hat(xi)|. A grid covers [beta, Xi]
/// and beyond Xi the bound |h-hat(xi)| <= 2.075 TV(f) / sqrt(xi) takes over,
/// with Xi chosen so that the bound is below the grid maximum.
double highfreq_gap(const DensityModel& model, double beta);

/// Largest beta0 <= 1 such that |h-hat(xi)| <= exp(-sigma |xi|^alpha / 2) on a
/// log grid of `grid` points in [beta0 / 1000, beta0], by bisection in log beta0.
double lowfreq_envelope(const DensityModel& model, const StableParams& params, int grid = 512);

/// eta(xi) = e^{-i xi E} h-hat(xi) - 1 + stable_exponent(params, xi).
std::complex<double> remainder(const DensityModel& model, const StableParams& params, double xi);

/// sup of |eta(xi)| / |xi|^alpha over log-spaced samples in (beta / 100, beta].
RemainderProbe omega(const DensityModel& model, const StableParams& params, double beta,
                     int samples = 256);

struct FdaOrderReport {
  /// Integral of |x|^{alpha + delta} |h0(x) - gamma(x)| over [-X, X].
  double integral = 0.0;
  /// Log-log slope of the integrand on [X/2, X].
  double decay_exponent = 0.0;
  /// decay_exponent < -1: the full integral is assessed (not proven) finite.
  bool assessed_finite = false;
};

/// h0 is the centred squared law h(x + E).
FdaOrderReport fda_order_check(const DensityModel& model, const StableParams& params, double delta,
                               double X);

}  // namespace levykac
