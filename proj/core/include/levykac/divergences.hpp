#pragma once

#include <functional>
#include <vector>

namespace levykac {

/// A density sampled at quadrature nodes: integral of g ~ sum_i weights[i] g(nodes[i]) values[i].
struct GridDensity {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> values;

  double mass() const;
};

/// The routines below compare two grid densities on the same nodes. Both must
/// have mass 1 within 1e-6; they are renormalised to exact discrete
/// probability vectors first, so the classical inequalities hold to rounding.

/// H(mu | nu); +inf when mu charges a node where nu vanishes.
double relative_entropy(const GridDensity& mu, const GridDensity& nu);

/// (1/2) integral of |mu - nu|.
double total_variation(const GridDensity& mu, const GridDensity& nu);

/// sqrt(2 H(mu | nu)) - TV(mu, nu); never negative beyond rounding.
double pinsker_margin(const GridDensity& mu, const GridDensity& nu);

/// integral of phi dmu - log integral of e^phi dnu, a lower bound for H(mu | nu).
double duality_lower_bound(const GridDensity& mu, const GridDensity& nu,
                           const std::function<double(double)>& phi);

}  // namespace levykac
