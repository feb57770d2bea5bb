#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "levykac/densities.hpp"
#include "levykac/stable.hpp"

namespace levykac {

struct NfoldOptions {
  /// When present the cutoff also satisfies N sigma X^alpha >= 40.
  std::optional<StableParams> params;
  /// Return untrusted results instead of throwing.
  bool force = false;
  /// Largest frequency cutoff tried on the untilted contour; tilted contours
  /// scale it with their frequency scale.
  double max_cutoff = 256.0;
  /// A result is trusted when the discarded high-frequency part is below this.
  double trust_threshold = 1e-12;
};

struct NfoldResult {
  std::vector<double> values;
  double xi_max = 0.0;          ///< largest frequency cutoff used
  double highfreq_bound = 0.0;  ///< bound on the discarded part, density units
  bool trusted = true;
};

/// h^{*N} for the squared law of a generator f, by inversion of h-hat^N.
///
/// Each point u is evaluated on a contour shifted by an exponential tilt
/// kappa chosen near the saddle point N m(kappa) = u, so far-tail values keep
/// their relative accuracy. Tilts are quantised to a half-octave ladder and the
/// spectrum for each tilt is computed once and cached; the object is safe to
/// share between threads.
class ConvolutionPower {
 public:
  ConvolutionPower(DensityModel model, int N, NfoldOptions options = {});
  ~ConvolutionPower();
  ConvolutionPower(const ConvolutionPower&) = delete;
  ConvolutionPower& operator=(const ConvolutionPower&) = delete;

  /// Values at every u; throws CertificationError("untrusted cutoff") when the
  /// high-frequency bound is not met, unless options.force is set.
  NfoldResult evaluate(std::span<const double> u) const;

  double operator()(double u) const;

  int N() const { return N_; }
  const DensityModel& model() const { return model_; }

 private:
  struct Level;
  struct Spectrum;

  Level& level(int index) const;
  int choose_level(double u) const;
  std::shared_ptr<const Spectrum> spectrum(int index, double dist) const;
  double circle_formula(double u) const;

  DensityModel model_;
  int N_;
  NfoldOptions options_;
  mutable std::recursive_mutex mutex_;
  mutable std::map<int, std::unique_ptr<Level>> levels_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const Spectrum>> spectra_;
};

NfoldResult nfold_density(const DensityModel& model, int N, std::span<const double> u,
                          const NfoldOptions& options = {});

}  // namespace levykac
