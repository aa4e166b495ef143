#pragma once

#include <utility>
#include <vector>

#include "eigencurve/linalg.hpp"

namespace eigencurve {

/// Coefficients of the explicit look-ahead update
///
///     z_{k+1} = sum_{i=0}^{s-1} alphas[i] * z_{k-i} + tau * beta * zdot_k
///
/// with truncation order `order` (exact on polynomials of degree <= order).
struct FormulaCoefficients {
  int order = 0;
  int past_points = 0;
  std::vector<double> alphas;
  double beta = 0.0;
  /// Every root of the characteristic polynomial in the closed unit disk,
  /// roots on the circle simple.
  bool stability_ok = false;
  /// Largest modulus among the roots other than the principal root 1.
  double parasitic_radius = 0.0;
  /// Largest x such that the update stays stable for the test equation
  /// zdot = -(x / tau) z, i.e. the admissible range of tau * eta. Zero when
  /// the formula is not zero-stable.
  double stability_limit = 0.0;

  /// Max |residual| of the Taylor order conditions 0..order.
  double order_residual() const;
};

/// Solves the order conditions for (order j, s past points). When s > j the
/// remaining s - j degrees of freedom are chosen to minimize the parasitic root
/// radius. Throws NumericalError when j > s (the maximal achievable order is s)
/// and InvalidArgument for j < 1 or s < 1.
FormulaCoefficients derive_formula(int j, int s);

/// Roots of zeta^s - (alpha_0 + h_lambda * beta) zeta^{s-1} - sum_{i>=1} alpha_i zeta^{s-1-i}.
std::vector<Complex> characteristic_roots(const FormulaCoefficients& f, double h_lambda = 0.0);

/// The (j, s) pairs this library recommends; each is zero-stable.
std::vector<std::pair<int, int>> shipped_formulas();

/// derive_formula(j, s) when it is stable, otherwise the highest order j' < j
/// with a stable coefficient set for the same s.
FormulaCoefficients stable_formula_at_most(int j, int s);

}  // namespace eigencurve
