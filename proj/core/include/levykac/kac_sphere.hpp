#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "levykac/convolution.hpp"
#include "levykac/densities.hpp"
#include "levykac/divergences.hpp"
#include "levykac/stable.hpp"

namespace levykac {

/// log |S^{N-1}| = log 2 + (N/2) log pi - log Gamma(N/2).
double log_sphere_area(int N);

/// log Z_N(f, sqrt(u)) = log 2 + log h^{*N}(u) - log |S^{N-1}| - ((N - 2)/2) log u.
/// Throws CertificationError if h^{*N}(u) is not positive or not trusted
/// (unless force is set).
double log_normalisation(const DensityModel& model, int N, double u, bool force = false);

/// F_N = f^{(x)N} / Z_N(f, sqrt N) on Kac's sphere of radius sqrt N.
///
/// The k-marginals are f^{(x)k}(v) g_k(|v|^2) with the radial factor
/// g_k(s) = h^{*(N-k)}(N - s) / h^{*N}(N). The convolution powers are created
/// with the law and shared; the object is safe to use from several threads.
class SphereLaw {
 public:
  SphereLaw(const DensityModel& model, int N, bool force = false);

  const DensityModel& model() const { return model_; }
  int N() const { return N_; }
  /// Stable parameters from the tail law of h, for models with an algebraic tail.
  const std::optional<StableParams>& stable() const { return stable_; }
  double h_N_at_N() const { return h_N_at_N_; }
  /// Bound on the discarded high-frequency part of h_N_at_N.
  double h_N_bound() const { return h_N_bound_; }
  bool trusted() const { return trusted_; }
  bool forced() const { return force_; }
  /// log Z_N(f, sqrt N).
  double log_Z() const;

  /// g_k(s) at each s; zero for s >= N. Requires 1 <= k <= N - 3.
  std::vector<double> radial_factor(int k, std::span<const double> s) const;

  /// Pi_1(F_N) at each v.
  std::vector<double> first_marginal(std::span<const double> v) const;

 private:
  DensityModel model_;
  int N_;
  bool force_;
  std::optional<StableParams> stable_;
  double h_N_at_N_ = 0.0;
  double h_N_bound_ = 0.0;
  bool trusted_ = true;
  std::vector<std::unique_ptr<ConvolutionPower>> powers_;  // N - 1, N - 2
};

/// Pi_k(F_N)(v) for a point v in R^k, 1 <= k <= N - 3.
double marginal_k(const SphereLaw& law, int k, std::span<const double> v);

/// Quadrature rule on [-sqrt N, sqrt N] through v = sqrt N sin(theta), which
/// flattens the edge behaviour of the marginals.
GridDensity sphere_grid(const SphereLaw& law);

/// ||Pi_k(F_N) - f^{(x)k}||_1 for k in {1, 2}.
double l1_marginal_gap(const SphereLaw& law, int k);

/// H_N(F_N) / N = integral of Pi_1 log f - log Z_N(f, sqrt N) / N.
double entropy_per_particle(const SphereLaw& law);

/// H(f | gamma) = integral of f log f + (log 2 pi + 1) / 2 for unit-energy f.
double entropy_target(const DensityModel& model);

struct CrossEntropy {
  double value;   ///< H_N(G_N | F_N) / N
  double target;  ///< H(g | f)
};

/// Relative entropy per particle between the sphere laws of gen and base.
CrossEntropy cross_entropy_per_particle(const DensityModel& gen, const DensityModel& base, int N,
                                        bool force = false);

/// I(f | gamma) = integral of (f'/f + x)^2 f.
double fisher_relative(const DensityModel& model);

/// W_1(Pi_1(F_N), f) as the integral of |CDF difference|.
double w1_first_marginal(const SphereLaw& law);

struct ChaosReport {
  int N = 0;
  double l1_gap_k1 = 0.0;
  double l1_gap_k2 = 0.0;
  double entropy_per_particle = 0.0;
  double entropy_target = 0.0;
  double w1_first_marginal = 0.0;
  /// Pinsker margin between Pi_1(F_N) and f on a grid covering both.
  double pinsker_margin = 0.0;
  double fisher_relative = 0.0;
  bool trusted = true;
};

ChaosReport chaos_report(const SphereLaw& law);

/// Pi_1(F_N) and f as grid densities on common nodes reaching into the tails of f.
std::pair<GridDensity, GridDensity> first_marginal_pair(const SphereLaw& law);

}  // namespace levykac
