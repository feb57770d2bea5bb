#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "levykac/clt.hpp"
#include "levykac/convolution.hpp"
#include "levykac/densities.hpp"
#include "levykac/errors.hpp"
#include "oracles.hpp"

using namespace levykac;
using cplx = std::complex<double>;

namespace {

// Exact stable parameters of the quartic squared law: C_S = 2 sqrt 2 / pi,
// alpha = 3/2, beta = 1, sigma = C_S Gamma(3/2) / (3/4) |cos(3 pi / 4)|.
StableParams quartic_exact() {
  const double cs = 2.0 * std::sqrt(2.0) / oracle::pi;
  return {cs * (std::sqrt(oracle::pi) / 2.0) / 0.75 * std::sqrt(0.5), 1.5, 1.0};
}

StableParams quartic_fitted() {
  const auto tl = estimate_tail_law(h_of(make_model("quartic")), 1e4, 1e8);
  return exponent_from_tail({tl.C_S, tl.alpha, tl.p, tl.q});
}

// gamma(0) for exp(-sigma |xi|^alpha (1 - i beta sgn tan(pi alpha / 2))):
// (1/pi) Re integral_0^inf exp(-sigma (1 - i beta tan) t^alpha) dt.
double stable_at_zero(const StableParams& p) {
  const cplx z = p.sigma * cplx(1.0, -p.beta * std::tan(oracle::pi * p.alpha / 2.0));
  return (std::tgamma(1.0 + 1.0 / p.alpha) * std::pow(z, -1.0 / p.alpha)).real() / oracle::pi;
}

}  // namespace

TEST(Clt, QuarticSupErrorDecreases) {
  const auto q = make_model("quartic");
  const auto p = quartic_fitted();
  double prev = INFINITY;
  for (int N : {16, 64, 256, 1024}) {
    const auto r = clt_sup_error(q, N, p);
    EXPECT_TRUE(r.trusted) << N;
    EXPECT_LT(r.highfreq_bound, 1e-12);
    EXPECT_LT(r.sup_err, prev) << N;
    EXPECT_GE(N * p.sigma * std::pow(r.xi_max, p.alpha), 40.0);
    EXPECT_NEAR(r.beta_N, std::pow(N, -1.0 / 2.2), 1e-15);
    prev = r.sup_err;
    if (N == 1024) {
      EXPECT_LT(r.sup_err, 0.05);
      EXPECT_GE(r.gamma0_ratio, 0.95);
      EXPECT_LE(r.gamma0_ratio, 1.05);
    }
  }
}

TEST(Clt, NormalisationAgainstDirectInversion) {
  // h^{*N}(N) by Simpson inversion of the contour-rotated transform, with
  // xi = t^2 to smooth the |xi|^{3/2} cusp at the origin.
  const int N = 256;
  const double u = N;
  auto integrand = [&](double t) {
    if (t == 0.0) return 0.0;
    const double xi = t * t;
    const cplx g = std::exp(static_cast<double>(N) * std::log(oracle::quartic_h_hat(xi, 40000)));
    return 2.0 * t * (g * std::polar(1.0, -xi * u)).real();
  };
  const double want = oracle::simpson(integrand, 0.0, std::sqrt(2.0), 2000) / oracle::pi;
  const auto p = quartic_fitted();
  ConvolutionPower conv(make_model("quartic"), N);
  EXPECT_NEAR(conv(u) / want, 1.0, 1e-9);
  const auto r = clt_sup_error(make_model("quartic"), N, p);
  EXPECT_NEAR(r.gamma0_ratio, std::pow(N, 1.0 / p.alpha) * want / stable_at_zero(p), 1e-8);
}

TEST(Clt, Preconditions) {
  const auto g = make_model("gauss");
  EXPECT_THROW(clt_sup_error(g, 64, {1.0, 1.99, 1.0}), PreconditionError);
  EXPECT_THROW(clt_sup_error(make_model("quartic"), 64, {1.0, 2.0, 1.0}), PreconditionError);
  auto lit = quartic_fitted();
  lit.sigma = -lit.sigma;
  EXPECT_THROW(clt_sup_error(make_model("quartic"), 64, lit), CertificationError);
  EXPECT_THROW(clt_sup_error(make_model("quartic"), 64, quartic_fitted(), {.grid_pow = 8}), PreconditionError);
}

TEST(HighFreq, GaussGapIsChiSquareModulus) {
  // |h-hat| = (1 + 4 xi^2)^{-1/4} decreases, so the gap sits at xi = beta.
  const double eta = highfreq_gap(h_of(make_model("gauss")), 1.0);
  EXPECT_GE(eta, 1.0 - std::pow(5.0, -0.25) - 1e-11);
  EXPECT_NEAR(eta, 1.0 - std::pow(5.0, -0.25), 1e-9);
}

TEST(HighFreq, QuarticHasGap) {
  const double eta = highfreq_gap(h_of(make_model("quartic")), 0.5);
  EXPECT_GT(eta, 0.0);
  // Cannot exceed the gap seen at the left end of the range.
  EXPECT_LE(eta, 1.0 - std::abs(oracle::quartic_h_hat(0.5)) + 1e-9);
  EXPECT_THROW(highfreq_gap(make_model("quartic"), 0.0), PreconditionError);
}

TEST(LowFreq, QuarticEnvelope) {
  const auto h = h_of(make_model("quartic"));
  const auto p = quartic_fitted();
  const double b0 = lowfreq_envelope(h, p);
  EXPECT_GE(b0, 1e-3);
  // Spot-check the envelope with the independent transform.
  for (double xi : {0.3 * b0, b0}) {
    EXPECT_LE(std::abs(oracle::quartic_h_hat(xi)), std::exp(-0.5 * p.sigma * std::pow(xi, p.alpha)) + 1e-12);
  }
  const double dense = lowfreq_envelope(h, p, 2048);
  EXPECT_LE(dense, b0 * std::pow(10.0, 3.0 / 511.0));
}

TEST(LowFreq, FailurePaths) {
  const auto g = h_of(make_model("gauss"));
  EXPECT_THROW(lowfreq_envelope(g, {1e3, 1.5, 0.0}), CertificationError);
  auto neg = quartic_fitted();
  neg.sigma = -neg.sigma;
  EXPECT_THROW(lowfreq_envelope(h_of(make_model("quartic")), neg), CertificationError);
}

TEST(Remainder, MatchesDefinition) {
  const auto q = make_model("quartic");
  const auto p = quartic_fitted();
  for (double xi : {0.05, 0.1, 0.7}) {
    const cplx hh = oracle::quartic_h_hat(xi);
    const cplx stable = p.sigma * std::pow(xi, p.alpha) * cplx(1.0, -p.beta * std::tan(oracle::pi * p.alpha / 2.0));
    const cplx want = std::polar(1.0, -xi) * hh - 1.0 + stable;  // E = 1
    EXPECT_NEAR(std::abs(remainder(q, p, xi) - want), 0.0, 1e-10) << xi;
    EXPECT_EQ(remainder(q, p, -xi), std::conj(remainder(q, p, xi)));
  }
  EXPECT_THROW(remainder(q, p, 0.0), PreconditionError);
}

TEST(Remainder, OmegaVanishesAndDoubledSigmaPlateaus) {
  const auto q = make_model("quartic");
  const auto p = quartic_exact();
  const StableParams doubled{2.0 * p.sigma, p.alpha, p.beta};
  // With sigma doubled eta picks up sigma |xi|^alpha (1 - i beta tan), of modulus sigma sqrt(2).
  const double plateau = p.sigma * std::sqrt(2.0);
  double prev = INFINITY;
  for (double beta : {1.0, 0.3, 0.1, 0.03}) {
    const auto r = omega(q, p, beta);
    EXPECT_EQ(r.n_samples, 256);
    EXPECT_LT(r.omega, prev) << beta;
    EXPECT_GE(r.omega, std::abs(remainder(q, p, beta)) / std::pow(beta, p.alpha));
    prev = r.omega;
  }
  // The true remainder still adds O(beta^{1/2}) on top of the plateau.
  EXPECT_NEAR(omega(q, doubled, 0.03).omega / plateau, 1.0, 0.15);
  EXPECT_NEAR(omega(q, doubled, 0.003).omega / plateau, 1.0, 0.06);
  EXPECT_GT(omega(q, doubled, 0.03).omega, 0.6 * omega(q, doubled, 1.0).omega);
}

TEST(Fda, OrderCheck) {
  const auto q = make_model("quartic");
  const auto p = quartic_exact();
  const auto r = fda_order_check(q, p, 0.2, 1e4);
  EXPECT_GT(r.integral, 0.0);
  EXPECT_TRUE(std::isfinite(r.integral));
  // h0 - gamma ~ x^{-7/2}, so the integrand decays like x^{1.7 - 3.5}.
  EXPECT_NEAR(r.decay_exponent, -1.8, 0.1);
  EXPECT_TRUE(r.assessed_finite);
  EXPECT_THROW(fda_order_check(q, p, 0.5, 1e4), PreconditionError);
  EXPECT_THROW(fda_order_check(q, p, 0.2, 0.0), PreconditionError);
}
