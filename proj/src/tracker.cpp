#include "eigencurve/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "eigencurve/errors.hpp"

namespace eigencurve {

namespace {

constexpr int kMaxBridgedSteps = 3;
// Sub-steps per sample gap during the self-starting phase.
constexpr int kBootstrapRefinement = 16;
constexpr double kAuditConditionTrigger = 1e8;
constexpr int kOptimalAssignmentLimit = 64;

int n_of(const CVector& z) { return static_cast<int>(z.size()) - 1; }

Complex lambda_of(const CVector& z) { return z(z.size() - 1); }

CVector stack(const CVector& v, Complex lambda) {
  CVector z(v.size() + 1);
  z.head(v.size()) = v;
  z(v.size()) = lambda;
  return z;
}

CVector apply_formula(const FormulaCoefficients& f, const std::deque<CVector>& history, const CVector& zdot,
                      double tau) {
  CVector next = tau * f.beta * zdot;
  for (int i = 0; i < f.past_points; ++i) next += f.alphas[static_cast<std::size_t>(i)] * history[static_cast<std::size_t>(i)];
  return next;
}

std::vector<int> assign(const Eigen::MatrixXd& cost) {
  return cost.rows() <= kOptimalAssignmentLimit ? min_cost_assignment(cost) : greedy_assignment(cost);
}

struct CurveState {
  std::deque<CVector> history;  // most recent first
  std::deque<CVector> derivatives;
  // States (and derivatives) for the next grid points, produced by a bootstrap.
  std::deque<CVector> pending;
  std::deque<CVector> pending_derivatives;
  int bridged = 0;
};

// Self-starting phase from a single state z at t: runs the bootstrap formulas
// and then `formula` on the sub-grid tau / kBootstrapRefinement, and returns the
// states and derivatives at t + tau, ..., t + steps * tau.
std::pair<std::deque<CVector>, std::deque<CVector>> refined_bootstrap(
    const MatrixFlow& flow, const CVector& z, double t, int steps, const ZNNConfig& cfg,
    const FormulaCoefficients& formula, const std::vector<FormulaCoefficients>& bootstrap) {
  const double h = cfg.tau / kBootstrapRefinement;
  std::deque<CVector> history{z};
  CVector last_derivative;
  std::pair<std::deque<CVector>, std::deque<CVector>> out;
  for (int i = 0; i < steps * kBootstrapRefinement; ++i) {
    const double ti = t + i * h;
    double condition = 0.0;
    CVector zdot = znn_derivative(history.front(), flow.evaluate(ti), flow.derivative(ti), cfg.eta, &condition);
    if (!(condition <= cfg.restart_threshold) || !zdot.allFinite())
      zdot = last_derivative.size() ? last_derivative : CVector::Zero(z.size());
    if (i % kBootstrapRefinement == 0) out.second.push_back(zdot);
    last_derivative = zdot;
    const int depth = static_cast<int>(history.size());
    const FormulaCoefficients& f =
        depth >= formula.past_points ? formula : bootstrap[static_cast<std::size_t>(depth - 1)];
    history.push_front(apply_formula(f, history, zdot, h));
    if (static_cast<int>(history.size()) > formula.past_points) history.pop_back();
    if ((i + 1) % kBootstrapRefinement == 0) out.first.push_back(history.front());
  }
  return out;
}

}  // namespace

std::string to_string(Provenance p) { return p == Provenance::Znn ? "znn" : "oracle"; }

Provenance provenance_from_string(const std::string& s) {
  if (s == "znn") return Provenance::Znn;
  if (s == "oracle") return Provenance::Oracle;
  throw FormatError("unknown trace provenance '" + s + "'");
}

void ZNNConfig::validate(const FormulaCoefficients& formula) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("ZNN config: tau must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("ZNN config: eta must be positive");
  if (order < 1 || past_points < 1) throw InvalidArgument("ZNN config: formula (j, s) must have j, s >= 1");
  if (!(restart_threshold > 1.0)) throw InvalidArgument("ZNN config: restart threshold must exceed 1");
  if (max_restarts_per_curve < 0) throw InvalidArgument("ZNN config: max restarts must be >= 0");
  if (!(residual_tolerance > 0.0)) throw InvalidArgument("ZNN config: residual tolerance must be positive");
  if (audit_interval < 1) throw InvalidArgument("ZNN config: audit interval must be >= 1");
  if (!formula.stability_ok || tau * eta > formula.stability_limit) {
    std::ostringstream os;
    os << "ZNN config: tau*eta = " << tau * eta << " exceeds the stability limit " << formula.stability_limit
       << " of formula (" << formula.order << "," << formula.past_points << ")";
    throw InvalidArgument(os.str());
  }
}

std::vector<double> sample_grid(double t0, double tf, double tau) {
  if (!std::isfinite(t0) || !std::isfinite(tf)) throw DomainError("sample grid: interval must be finite");
  if (!(t0 < tf)) throw InvalidArgument("sample grid: requires t0 < tf");
  if (!(tau > 0.0)) throw InvalidArgument("sample grid: tau must be positive");
  const double span = (tf - t0) / tau;
  const double rounded = std::round(span);
  const bool exact = std::abs(span - rounded) <= 1e-9 * std::max(1.0, span);
  const auto steps = static_cast<long long>(exact ? rounded : std::floor(span));
  std::vector<double> grid(static_cast<std::size_t>(steps + 1));
  for (long long k = 0; k <= steps; ++k) grid[static_cast<std::size_t>(k)] = t0 + static_cast<double>(k) * tau;
  if (exact) grid.back() = tf;
  return grid;
}

CVector znn_derivative(const CVector& z, const CMatrix& a, const CMatrix& a_dot, double eta, double* condition) {
  const int n = n_of(z);
  const CVector v = z.head(n);
  const Complex lambda = lambda_of(z);
  CMatrix p(n + 1, n + 1);
  p.topLeftCorner(n, n) = a;
  p.topLeftCorner(n, n).diagonal().array() -= lambda;
  p.topRightCorner(n, 1) = -v;
  p.bottomLeftCorner(1, n) = v.adjoint();
  p(n, n) = 0.0;
  CVector b(n + 1);
  b.head(n) = -a_dot * v - eta * (a * v - lambda * v);
  b(n) = -eta * (v.squaredNorm() - 1.0) / 2.0;
  Eigen::PartialPivLU<CMatrix> lu(p);
  const double rcond = lu.rcond();
  if (condition) *condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  return lu.solve(b);
}

ZnnStep znn_step(std::span<const CVector> history, double t, const MatrixFlow& flow, const ZNNConfig& cfg,
                 const FormulaCoefficients& formula) {
  if (history.size() < static_cast<std::size_t>(formula.past_points))
    throw InvalidArgument("znn_step: history shorter than the formula's past points");
  ZnnStep out;
  out.derivative = znn_derivative(history[0], flow.evaluate(t), flow.derivative(t), cfg.eta, &out.condition);
  out.restart_needed = !(out.condition <= cfg.restart_threshold) || !out.derivative.allFinite();
  std::deque<CVector> past(history.begin(), history.begin() + formula.past_points);
  out.next = apply_formula(formula, past, out.derivative, cfg.tau);
  return out;
}

FormulaCoefficients resolve_formula(const ZNNConfig& cfg, std::vector<std::string>* notices) {
  FormulaCoefficients f = derive_formula(cfg.order, cfg.past_points);
  if (f.stability_ok) return f;
  FormulaCoefficients fallback = stable_formula_at_most(cfg.order, cfg.past_points);
  if (notices) {
    std::ostringstream os;
    os << "formula (" << cfg.order << "," << cfg.past_points << ") has no zero-stable coefficient set "
       << "(parasitic root radius " << f.parasitic_radius << "); using (" << fallback.order << ","
       << fallback.past_points << ")";
    notices->push_back(os.str());
  }
  return fallback;
}

TraceSet trace(const MatrixFlow& flow, double t0, double tf, const ZNNConfig& cfg, TraceDiagnostics* diagnostics,
               const ProgressFn& progress) {
  TraceDiagnostics local;
  TraceDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = TraceDiagnostics{};
  const FormulaCoefficients formula = resolve_formula(cfg, &diag.notices);
  diag.formula = formula;
  cfg.validate(formula);

  const std::vector<double> grid = sample_grid(t0, tf, cfg.tau);
  const int last = static_cast<int>(grid.size()) - 1;
  if (last < formula.past_points)
    throw InvalidArgument("trace: interval holds fewer steps than the formula's past points");

  // Lower-order formulas for history depth h < s.
  std::vector<FormulaCoefficients> bootstrap;
  for (int h = 1; h < formula.past_points; ++h) bootstrap.push_back(derive_formula(std::min(formula.order, h), h));

  const int n = flow.dimension();
  const bool hermitean = flow.is_hermitean();
  TraceSet traces(static_cast<std::size_t>(n));
  std::vector<CurveState> states(static_cast<std::size_t>(n));

  // Starts curve c afresh from an exact eigenpair at grid index k.
  auto start = [&](int c, const EigenPair& pair, int k) {
    auto& st = states[static_cast<std::size_t>(c)];
    st = CurveState{};
    const CVector z = stack(pair.vector, pair.value);
    st.history.push_front(z);
    const int steps = std::min(formula.past_points - 1, last - k);
    auto [states_ahead, derivatives] = refined_bootstrap(flow, z, grid[static_cast<std::size_t>(k)], steps, cfg,
                                                         formula, bootstrap);
    st.pending = std::move(states_ahead);
    st.pending_derivatives = std::move(derivatives);
  };

  auto restart = [&](int c, const EigenPair& pair, int k) {
    start(c, pair, k);
    auto& tr = traces[static_cast<std::size_t>(c)];
    tr.restarts.push_back(grid[static_cast<std::size_t>(k)]);
    if (static_cast<int>(tr.restarts.size()) > cfg.max_restarts_per_curve) tr.degenerate = true;
  };

  auto record = [&](int c, const CVector& z) {
    auto& tr = traces[static_cast<std::size_t>(c)];
    tr.values.push_back(lambda_of(z));
    if (cfg.store_vectors) tr.vectors.push_back(z.head(n).normalized());
  };

  CMatrix a = flow.evaluate(grid[0]);
  const auto seed = static_eigen(a, hermitean);
  for (int c = 0; c < n; ++c) {
    auto& tr = traces[static_cast<std::size_t>(c)];
    tr.curve_index = c + 1;
    tr.provenance = Provenance::Znn;
    tr.times = grid;
    tr.values.reserve(grid.size());
    start(c, seed[static_cast<std::size_t>(c)], 0);
    record(c, states[static_cast<std::size_t>(c)].history.front());
  }

  const double audit_tol = 1e-3 * std::max(1.0, a.norm());
  CMatrix a_dot;
  for (int k = 0; k < last; ++k) {
    const double t = grid[static_cast<std::size_t>(k)];
    bool need_audit = (k + 1) % cfg.audit_interval == 0;
    std::vector<char> needs_reseed(static_cast<std::size_t>(n), 0);

    for (int c = 0; c < n; ++c) {
      auto& st = states[static_cast<std::size_t>(c)];
      CVector zdot;
      CVector next;
      if (!st.pending.empty()) {
        next = std::move(st.pending.front());
        st.pending.pop_front();
        zdot = std::move(st.pending_derivatives.front());
        st.pending_derivatives.pop_front();
      } else {
        if (a_dot.size() == 0) a_dot = flow.derivative(t);
        double condition = 0.0;
        zdot = znn_derivative(st.history.front(), a, a_dot, cfg.eta, &condition);
        if (condition > kAuditConditionTrigger) need_audit = true;
        if (!(condition <= cfg.restart_threshold) || !zdot.allFinite()) {
          if (st.derivatives.empty() || st.bridged >= kMaxBridgedSteps) {
            needs_reseed[static_cast<std::size_t>(c)] = 1;
            zdot = st.derivatives.empty() ? CVector::Zero(n + 1) : st.derivatives.front();
          } else {
            zdot = st.derivatives.size() >= 2 ? CVector(2.0 * st.derivatives[0] - st.derivatives[1])
                                               : st.derivatives.front();
            ++st.bridged;
            ++diag.bridged_steps;
          }
        } else {
          st.bridged = 0;
        }
        next = apply_formula(formula, st.history, zdot, cfg.tau);
      }
      st.derivatives.push_front(std::move(zdot));
      if (st.derivatives.size() > 2) st.derivatives.pop_back();
      st.history.push_front(std::move(next));
      if (static_cast<int>(st.history.size()) > formula.past_points) st.history.pop_back();
    }

    const int k_next = k + 1;
    a = flow.evaluate(grid[static_cast<std::size_t>(k_next)]);
    a_dot.resize(0, 0);
    std::vector<EigenPair> spectrum;
    auto ensure_spectrum = [&]() -> const std::vector<EigenPair>& {
      if (spectrum.empty()) spectrum = static_eigen(a, hermitean);
      return spectrum;
    };

    for (int c = 0; c < n; ++c) {
      const CVector& z = states[static_cast<std::size_t>(c)].history.front();
      const double vnorm = z.head(n).norm();
      const bool finite = z.allFinite() && vnorm > 0.0;
      const bool residual_ok =
          finite && eigen_residual(a, z.head(n) / vnorm, lambda_of(z)) <= cfg.residual_tolerance;
      if (needs_reseed[static_cast<std::size_t>(c)] || !residual_ok) {
        // Continuity matching: the static eigenpair closest to the propagated value.
        const Complex predicted = finite ? lambda_of(z) : traces[static_cast<std::size_t>(c)].values.back();
        const auto& spec = ensure_spectrum();
        const auto best = std::min_element(spec.begin(), spec.end(), [&](const EigenPair& x, const EigenPair& y) {
          return std::abs(x.value - predicted) < std::abs(y.value - predicted);
        });
        restart(c, *best, k_next);
        need_audit = true;
      }
    }

    if (need_audit) {
      ++diag.audits;
      const auto& spec = ensure_spectrum();
      Eigen::MatrixXd cost(n, n);
      for (int c = 0; c < n; ++c)
        for (int m = 0; m < n; ++m)
          cost(c, m) = std::abs(lambda_of(states[static_cast<std::size_t>(c)].history.front()) -
                                spec[static_cast<std::size_t>(m)].value);
      const auto match = assign(cost);
      for (int c = 0; c < n; ++c) {
        const int m = match[static_cast<std::size_t>(c)];
        if (cost(c, m) > audit_tol) {
          // Two curves collapsed onto one eigenvalue; move this one to the unclaimed branch.
          restart(c, spec[static_cast<std::size_t>(m)], k_next);
          ++diag.audit_repairs;
        }
      }
    }

    for (int c = 0; c < n; ++c) record(c, states[static_cast<std::size_t>(c)].history.front());
    if (progress && (k % 256 == 0 || k_next == last)) progress(static_cast<double>(k_next) / last);
  }

  for (const auto& tr : traces) {
    if (!tr.degenerate) continue;
    std::ostringstream os;
    os << "curve " << tr.curve_index << " exceeded " << cfg.max_restarts_per_curve << " restarts (first at t="
       << tr.restarts.front() << "); flagged degenerate";
    diag.notices.push_back(os.str());
  }
  if (diag.audit_repairs > 0) {
    std::ostringstream os;
    os << diag.audit_repairs << " collapsed curve state(s) re-seeded after spectrum audits";
    diag.notices.push_back(os.str());
  }
  return traces;
}

TraceSet oracle_trace(const MatrixFlow& flow, double t0, double tf, double tau, bool store_vectors,
                      const ProgressFn& progress) {
  const std::vector<double> grid = sample_grid(t0, tf, tau);
  const int n = flow.dimension();
  const bool hermitean = flow.is_hermitean();
  TraceSet traces(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    auto& tr = traces[static_cast<std::size_t>(c)];
    tr.curve_index = c + 1;
    tr.provenance = Provenance::Oracle;
    tr.times = grid;
    tr.values.reserve(grid.size());
  }
  Eigen::MatrixXd cost(n, n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto spectrum = static_eigen(flow.evaluate(grid[k]), hermitean);
    std::vector<int> match(static_cast<std::size_t>(n));
    if (k == 0) {
      for (int c = 0; c < n; ++c) match[static_cast<std::size_t>(c)] = c;
    } else {
      for (int c = 0; c < n; ++c) {
        const auto& vals = traces[static_cast<std::size_t>(c)].values;
        const Complex predicted = k >= 2 ? 2.0 * vals[k - 1] - vals[k - 2] : vals[k - 1];
        for (int m = 0; m < n; ++m) cost(c, m) = std::abs(predicted - spectrum[static_cast<std::size_t>(m)].value);
      }
      match = assign(cost);
    }
    for (int c = 0; c < n; ++c) {
      const auto& pair = spectrum[static_cast<std::size_t>(match[static_cast<std::size_t>(c)])];
      traces[static_cast<std::size_t>(c)].values.push_back(pair.value);
      if (store_vectors) traces[static_cast<std::size_t>(c)].vectors.push_back(pair.vector);
    }
    if (progress && (k % 256 == 0 || k + 1 == grid.size())) progress(static_cast<double>(k + 1) / static_cast<double>(grid.size()));
  }
  return traces;
}

double max_trace_deviation(const TraceSet& a, const TraceSet& b) {
  if (a.size() != b.size()) throw InvalidArgument("max_trace_deviation: trace counts differ");
  double worst = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c].values.size() != b[c].values.size()) throw InvalidArgument("max_trace_deviation: grids differ");
    for (std::size_t k = 0; k < a[c].values.size(); ++k) worst = std::max(worst, std::abs(a[c].values[k] - b[c].values[k]));
  }
  return worst;
}

}  // namespace eigencurve
