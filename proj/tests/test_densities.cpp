#include <gtest/gtest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "levykac/densities.hpp"
#include "levykac/errors.hpp"
#include "oracles.hpp"

using namespace levykac;

namespace {
const double kD = std::sqrt(2.0) / oracle::pi;
}

TEST(MakeModel, PointValues) {
  EXPECT_NEAR(make_model("quartic").pdf(0.0), kD, 1e-15);
  EXPECT_NEAR(make_model("gauss").pdf(0.0), 1.0 / std::sqrt(2.0 * oracle::pi), 1e-15);
  const auto q = make_model("quartic");
  for (double x : {-3.0, -0.4, 0.7, 5.0}) EXPECT_NEAR(q.pdf(x), oracle::quartic(x), 1e-16);
}

TEST(MakeModel, RejectsBadInput) {
  EXPECT_THROW(make_model("cauchy"), PreconditionError);
  EXPECT_THROW(make_model("power-tail", {{"alpha", 2.0}}), PreconditionError);
  EXPECT_THROW(make_model("power-tail", {{"alpha", 1.0}}), PreconditionError);
  EXPECT_THROW(make_model("mixture", {{"delta", 0.0}}), PreconditionError);
  EXPECT_THROW(make_model("mixture", {{"delta", 1.0}}), PreconditionError);
  EXPECT_THROW(make_model("quartic", {{"alpha", 1.5}}), PreconditionError);
  EXPECT_THROW(parse_model("power-tail(abc)"), PreconditionError);
  EXPECT_THROW(parse_model("quartic(2)"), PreconditionError);
}

TEST(MakeModel, ParseNames) {
  EXPECT_EQ(parse_model("power-tail(1.2)").name(), "power-tail(1.2)");
  EXPECT_EQ(parse_model("mixture(0.3)").name(), "mixture(0.3)");
  EXPECT_EQ(parse_model("quartic").name(), "quartic");
}

TEST(MakeModel, QuarticMassAndEnergyMatchClosedForm) {
  // Both integrals equal pi/sqrt(2) before the sqrt(2)/pi prefactor.
  const double mass = oracle::line_by_tan([](double x) { return 1.0 / (1.0 + x * x * x * x); });
  const double energy = oracle::line_by_tan([](double x) { return x * x / (1.0 + x * x * x * x); });
  EXPECT_NEAR(mass, oracle::pi / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(energy, oracle::pi / std::sqrt(2.0), 1e-9);

  const auto m = moments(make_model("quartic"));
  EXPECT_NEAR(m.mass, kD * mass, 1e-8);
  EXPECT_NEAR(m.second_moment, kD * energy, 1e-8);
  EXPECT_NEAR(m.mean, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.E, m.second_moment);
}

TEST(Moments, EveryRegisteredModelIsUnitMassUnitEnergy) {
  for (const char* spec : {"gauss", "quartic", "power-tail(1.2)", "power-tail(1.5)", "power-tail(1.8)",
                           "mixture(0.3)", "mixture(0.5)"}) {
    const auto model = parse_model(spec);
    const auto m = moments(model);
    EXPECT_NEAR(m.mass, 1.0, 1e-8) << spec;
    ASSERT_TRUE(model.unit_energy()) << spec;
    EXPECT_NEAR(m.second_moment, 1.0, 1e-8) << spec;
  }
}

TEST(Moments, GaussianFourthMomentIsThree) {
  const auto m = moments(make_model("gauss"));
  EXPECT_FALSE(m.fourth_moment_infinite);
  EXPECT_NEAR(m.fourth_moment, 3.0, 1e-10);
}

TEST(Moments, HeavyTailFourthMomentIsInfiniteAndQuadratureDiverges) {
  const auto q = make_model("quartic");
  const auto m = moments(q);
  EXPECT_TRUE(m.fourth_moment_infinite);
  EXPECT_TRUE(std::isinf(m.fourth_moment));
  double prev = 0.0;
  for (double X : {1e1, 1e2, 1e3, 1e4}) {
    const double v = truncated_moment(q, 4.0, X);
    EXPECT_GT(v, 5.0 * prev);
    prev = v;
  }
}

TEST(Moments, PowerTailScaleMatchesRootFinding) {
  for (double alpha : {1.2, 1.5, 1.8}) {
    const double p = 1.0 + 2.0 * alpha;
    // Mass of 1/(1+|y|^p) and its second moment, by independent quadrature.
    const double m0 = 2.0 * oracle::half_line_by_exp([p](double y) { return 1.0 / (1.0 + std::pow(y, p)); });
    const double m2 =
        2.0 * oracle::half_line_by_exp([p](double y) { return 1.0 / (1.0 / (y * y) + std::pow(y, p - 2.0)); }, -80.0, 250.0);
    // Density c/(s(1+|x/s|^p)) has mass c*m0 and second moment c*s^2*m2.
    const double c = 1.0 / m0;
    const double s = oracle::bisect([&](double s) { return c * s * s * m2 - 1.0; }, 0.1, 10.0);
    const auto model = make_model("power-tail", {{"alpha", alpha}});
    EXPECT_NEAR(model.normalization_scale(), s, 1e-8) << alpha;
    EXPECT_NEAR(model.pdf(0.0), c / s, 1e-8) << alpha;
    ASSERT_TRUE(model.analytic_tail());
    EXPECT_NEAR(model.analytic_tail()->amplitude, c * std::pow(s, p - 1.0), 1e-8);
  }
}

TEST(Moments, PowerTailAtThreeHalvesIsQuartic) {
  const auto a = make_model("power-tail", {{"alpha", 1.5}});
  const auto b = make_model("quartic");
  for (double x : {0.0, 0.3, 1.0, 2.5, 40.0}) EXPECT_NEAR(a.pdf(x), b.pdf(x), 1e-15 + 1e-13 * b.pdf(x));
}

TEST(Moments, TailExpansionMatchesDensity) {
  for (const char* spec : {"quartic", "power-tail(1.2)", "power-tail(1.8)"}) {
    const auto m = parse_model(spec);
    const auto& t = *m.tail_expansion();
    for (double x : {t.start, 1.7 * t.start, 10.0 * t.start, 1e3 * t.start}) {
      EXPECT_NEAR(t(x), m.pdf(x), 1e-14 * m.pdf(x)) << spec << " " << x;
    }
  }
}

TEST(SquaredLaw, PointValues) {
  const auto h = h_of(make_model("quartic"));
  EXPECT_NEAR(h.pdf(1.0), std::sqrt(2.0) / (2.0 * oracle::pi), 1e-15);
  EXPECT_EQ(h.pdf(-1.0), 0.0);
  EXPECT_EQ(h.pdf(0.0), 0.0);
  EXPECT_FALSE(h.unit_energy());
  const auto hg = h_of(make_model("gauss"));
  for (double u : {0.01, 0.5, 1.0, 3.0, 20.0}) EXPECT_NEAR(hg.pdf(u), oracle::chi2_density(1, u), 1e-15);
}

TEST(SquaredLaw, MassAndMeanMatchGenerator) {
  for (const char* spec : {"gauss", "quartic", "power-tail(1.2)", "mixture(0.3)"}) {
    const auto f = parse_model(spec);
    const auto h = h_of(f);
    // Direct quadrature of h on the u axis.
    const double mass = oracle::half_line_by_exp([&](double u) { return h.pdf(u); });
    EXPECT_NEAR(mass, 1.0, 1e-7) << spec;
    const auto mh = moments(h);
    const auto mf = moments(f);
    EXPECT_NEAR(mh.mass, 1.0, 1e-8) << spec;
    EXPECT_NEAR(mh.mean, mf.second_moment, 1e-8) << spec;
    EXPECT_NEAR(integrate_against(h, [](double) { return 1.0; }), 1.0, 1e-8) << spec;
    EXPECT_NEAR(integrate_against(h, [](double u) { return u; }), mf.second_moment, 1e-8) << spec;
  }
}

TEST(SquaredLaw, DerivativeMatchesDifferenceQuotient) {
  const auto h = h_of(make_model("quartic"));
  for (double u : {0.2, 1.0, 3.0}) {
    const double e = 1e-5;
    EXPECT_NEAR(h.derivative(u), (h.pdf(u + e) - h.pdf(u - e)) / (2 * e), 1e-8);
  }
}

TEST(NuF, GaussSaturatesAtThree) {
  const auto g = make_model("gauss");
  EXPECT_NEAR(nu_f(g, 400.0), 3.0, 1e-10);
  EXPECT_LT(nu_f(g, 1e-6), 1e-12);
}

TEST(NuF, QuarticMatchesClosedForm) {
  // y^4/(1+y^4) = 1 - 1/(1+y^4), and the integral of 1/(1+y^4) over |y| > R
  // is 2 sum_k (-1)^k R^{-4k-3}/(4k+3).
  const auto q = make_model("quartic");
  for (double R : {10.0, 1000.0}) {
    double tail = 0.0;
    for (int k = 0; k < 12; ++k) tail += 2.0 * (k % 2 ? -1.0 : 1.0) * std::pow(R, -4.0 * k - 3.0) / (4.0 * k + 3.0);
    const double expected = kD * (2.0 * R - (oracle::pi / std::sqrt(2.0) - tail));
    EXPECT_NEAR(nu_f(q, R * R), expected, 1e-9 * expected);
  }
  EXPECT_NEAR(nu_f(q, 1e6) / 1e3, 2.0 * std::sqrt(2.0) / oracle::pi, 2e-3);
  EXPECT_LT(nu_f(q, 1e-8), 1e-19);
}

TEST(NuF, Monotone) {
  for (const char* spec : {"gauss", "quartic", "power-tail(1.2)", "mixture(0.3)"}) {
    const auto m = parse_model(spec);
    double prev = 0.0;
    for (double x = 1e-3; x < 1e7; x *= 1.7) {
      const double v = nu_f(m, x);
      EXPECT_GE(v, prev) << spec << " " << x;
      prev = v;
    }
  }
}

TEST(TailLaw, QuarticWindow) {
  const auto law = estimate_tail_law(make_model("quartic"), 1e4, 1e8);
  EXPECT_GE(law.alpha, 1.45);
  EXPECT_LE(law.alpha, 1.55);
  EXPECT_NEAR(law.C_S, 2.0 * std::sqrt(2.0) / oracle::pi, 0.05 * 0.90032);
  EXPECT_NEAR(law.p, 1.0, 1e-12);
  EXPECT_NEAR(law.q, 0.0, 1e-12);
  EXPECT_LT(law.residual, 0.05);
}

TEST(TailLaw, PowerTailRecoversExponent) {
  for (double alpha : {1.2, 1.5, 1.8}) {
    const auto law = estimate_tail_law(make_model("power-tail", {{"alpha", alpha}}), 1e4, 1e8);
    EXPECT_NEAR(law.alpha, alpha, 0.05) << alpha;
  }
}

TEST(TailLaw, GaussIsRejected) {
  try {
    estimate_tail_law(make_model("gauss"), 1e4, 1e8);
    FAIL() << "expected failure";
  } catch (const CertificationError& e) {
    EXPECT_NE(std::string(e.what()).find("not regularly varying"), std::string::npos);
  }
  EXPECT_THROW(estimate_tail_law(make_model("quartic"), 1e4, 1e3), PreconditionError);
  EXPECT_THROW(estimate_tail_law(make_model("quartic"), 1e4, 1e8, 4), PreconditionError);
}

TEST(Skew, Fractions) {
  auto [p, q] = skew_fractions(h_of(make_model("quartic")), 1e4);
  EXPECT_EQ(p, 1.0);
  EXPECT_EQ(q, 0.0);
  std::tie(p, q) = skew_fractions(make_model("gauss"), 1.0);
  EXPECT_NEAR(p, 0.5, 1e-14);
  EXPECT_NEAR(q, 0.5, 1e-14);
  std::tie(p, q) = skew_fractions(h_of(make_model("gauss")), 100.0);
  EXPECT_EQ(p, 1.0);
  EXPECT_EQ(q, 0.0);
  EXPECT_THROW(skew_fractions(make_model("gauss"), 1e3), CertificationError);
}

TEST(Skew, TailMassMatchesClosedForm) {
  // P(X > 1) for the Gaussian.
  EXPECT_NEAR(upper_tail_mass(make_model("gauss"), 1.0), 0.5 * std::erfc(1.0 / std::sqrt(2.0)), 1e-13);
  // Quartic: P(X > R) ~ D (R^-3/3 - R^-7/7 + ...)
  const double R = 50.0;
  const double expected = kD * (std::pow(R, -3) / 3 - std::pow(R, -7) / 7 + std::pow(R, -11) / 11);
  EXPECT_NEAR(upper_tail_mass(make_model("quartic"), R), expected, 1e-12 * expected);
}

TEST(DensityModel, ConcurrentEvaluation) {
  const auto q = make_model("quartic");
  const double ref = nu_f(q, 1e5);
  std::vector<std::thread> pool;
  std::vector<double> out(8);
  for (int i = 0; i < 8; ++i) pool.emplace_back([&, i] { out[i] = nu_f(q, 1e5); });
  for (auto& t : pool) t.join();
  for (double v : out) EXPECT_EQ(v, ref);
}

TEST(DensityModel, DerivativeRequired) {
  DensityModel::Definition d;
  d.name = "bare";
  d.pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * oracle::pi); };
  d.gaussian_rate = 0.5;
  const DensityModel m(d);
  EXPECT_FALSE(m.has_derivative());
  EXPECT_THROW(m.derivative(0.0), PreconditionError);
}
