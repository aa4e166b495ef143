#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eigencurve/flow.hpp"
#include "eigencurve/formula.hpp"

namespace eigencurve {

struct ZNNConfig {
  double tau = 1e-3;  // sampling gap
  double eta = 50.0;  // decay constant of the error function
  int order = 3;      // truncation order j of the look-ahead formula
  int past_points = 5;
  double restart_threshold = 1e12;  // condition estimate of the step system
  int max_restarts_per_curve = 20;
  double residual_tolerance = 1e-6;
  // Steps between spectrum-completeness audits against a static eigensolve.
  int audit_interval = 100;
  bool store_vectors = false;

  /// Throws InvalidArgument for non-positive tau/eta, j or s < 1, or a
  /// tau * eta beyond the stability limit of `formula`.
  void validate(const FormulaCoefficients& formula) const;

  friend bool operator==(const ZNNConfig&, const ZNNConfig&) = default;
};

enum class Provenance { Znn, Oracle };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct EigencurveTrace {
  int curve_index = 0;  // 1-based, descending order at t0
  std::vector<double> times;
  std::vector<Complex> values;
  std::vector<CVector> vectors;  // unit norm; empty unless requested
  Provenance provenance = Provenance::Znn;
  std::vector<double> restarts;
  bool degenerate = false;  // exceeded max_restarts_per_curve

  friend bool operator==(const EigencurveTrace&, const EigencurveTrace&) = default;
};

using TraceSet = std::vector<EigencurveTrace>;
using ProgressFn = std::function<void(double fraction)>;

/// Uniform grid t0 + k tau, k = 0..K; the last node is snapped to tf when the
/// interval is an integer multiple of tau (to 1e-9 relative).
std::vector<double> sample_grid(double t0, double tf, double tau);

/// ZNN state z = (v, lambda) stacked as an (n+1)-vector.
struct ZnnStep {
  CVector next;         // z at t + tau
  CVector derivative;   // zdot at t
  double condition = 0;  // estimate of cond(P(t))
  bool restart_needed = false;
};

/// zdot at (z, t) from P zdot = b with
///   P = [[A - lambda I, -v], [v^*, 0]],
///   b = [-Adot v - eta (A v - lambda v); -eta (v^* v - 1) / 2].
/// `condition` receives 1 / rcond of the LU factorization.
CVector znn_derivative(const CVector& z, const CMatrix& a, const CMatrix& a_dot, double eta, double* condition);

/// One look-ahead step. `history` holds z_k, z_{k-1}, ... (most recent first)
/// with at least formula.past_points entries.
ZnnStep znn_step(std::span<const CVector> history, double t, const MatrixFlow& flow, const ZNNConfig& cfg,
                 const FormulaCoefficients& formula);

struct TraceDiagnostics {
  FormulaCoefficients formula;  // the formula actually used
  std::vector<std::string> notices;
  int audits = 0;
  int audit_repairs = 0;
  int bridged_steps = 0;
};

/// Formula for cfg: derive_formula(order, past_points) when stable, otherwise
/// the highest stable order with the same number of past points (a notice is
/// appended to `notices`).
FormulaCoefficients resolve_formula(const ZNNConfig& cfg, std::vector<std::string>* notices = nullptr);

/// Traces all n eigencurves on [t0, tf] with the ZNN look-ahead propagator,
/// seeded from static_eigen(A(t0)).
///
/// Ill-conditioned isolated steps (a crossing sampled almost exactly) reuse an
/// extrapolated derivative; persistent ill-conditioning, residuals above the
/// tolerance, or a failed spectrum audit re-seed the affected curve from a
/// static eigensolve and record a restart.
TraceSet trace(const MatrixFlow& flow, double t0, double tf, const ZNNConfig& cfg,
               TraceDiagnostics* diagnostics = nullptr, const ProgressFn& progress = {});

/// Verification path: full static eigensolve at every grid point, eigenvalues
/// assigned to curves by minimal total distance to the linear extrapolation of
/// each curve (optimal assignment for n <= 64, greedy beyond).
TraceSet oracle_trace(const MatrixFlow& flow, double t0, double tf, double tau, bool store_vectors = false,
                      const ProgressFn& progress = {});

/// Max over samples and curves of |a_c(t_k) - b_c(t_k)|; traces must share the grid.
double max_trace_deviation(const TraceSet& a, const TraceSet& b);

}  // namespace eigencurve
