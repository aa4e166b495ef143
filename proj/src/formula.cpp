#include "eigencurve/formula.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "eigencurve/errors.hpp"

namespace eigencurve {

namespace {

// Row m of the order-condition system, unknowns (alpha_0..alpha_{s-1}, beta).
Eigen::MatrixXd order_matrix(int j, int s) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(j + 1, s + 1);
  for (int m = 0; m <= j; ++m) {
    for (int i = 0; i < s; ++i) a(m, i) = m == 0 ? 1.0 : std::pow(-static_cast<double>(i), m);
    a(m, s) = m == 1 ? 1.0 : 0.0;
  }
  return a;
}

std::vector<Complex> poly_roots(const Eigen::VectorXd& monic_tail) {
  // zeta^s + c_1 zeta^{s-1} + ... + c_s, companion matrix eigenvalues.
  const auto s = monic_tail.size();
  if (s == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(s, s);
  for (Eigen::Index k = 0; k < s; ++k) companion(0, k) = -monic_tail(k);
  for (Eigen::Index k = 1; k < s; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<Complex> roots;
  for (Eigen::Index k = 0; k < s; ++k) roots.push_back(solver.eigenvalues()(k));
  return roots;
}

std::vector<Complex> roots_of(const std::vector<double>& alphas, double beta, double h_lambda) {
  Eigen::VectorXd tail(static_cast<Eigen::Index>(alphas.size()));
  for (std::size_t i = 0; i < alphas.size(); ++i) tail(static_cast<Eigen::Index>(i)) = -alphas[i];
  tail(0) -= h_lambda * beta;
  return poly_roots(tail);
}

double parasitic_radius(const std::vector<Complex>& roots) {
  if (roots.size() <= 1) return 0.0;
  auto principal = std::min_element(roots.begin(), roots.end(), [](Complex a, Complex b) {
    return std::abs(a - 1.0) < std::abs(b - 1.0);
  });
  double r = 0.0;
  for (auto it = roots.begin(); it != roots.end(); ++it)
    if (it != principal) r = std::max(r, std::abs(*it));
  return r;
}

bool roots_stable(const std::vector<Complex>& roots) {
  for (std::size_t a = 0; a < roots.size(); ++a) {
    const double mod = std::abs(roots[a]);
    if (mod > 1.0 + 1e-9) return false;
    if (mod > 1.0 - 1e-9) {
      for (std::size_t b = 0; b < roots.size(); ++b)
        if (b != a && std::abs(roots[a] - roots[b]) < 1e-6) return false;
    }
  }
  return true;
}

// Plain Nelder-Mead; returns the best vertex.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                            double step, int max_iter) {
  const auto dim = x0.size();
  std::vector<Eigen::VectorXd> simplex{x0};
  for (Eigen::Index k = 0; k < dim; ++k) {
    Eigen::VectorXd v = x0;
    v(k) += step;
    simplex.push_back(v);
  }
  std::vector<double> values;
  for (const auto& v : simplex) values.push_back(f(v));
  auto order = [&] {
    std::vector<std::size_t> idx(simplex.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> v2;
    for (auto k : idx) {
      s2.push_back(simplex[k]);
      v2.push_back(values[k]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };
  for (int iter = 0; iter < max_iter; ++iter) {
    order();
    if (values.back() - values.front() < 1e-14 && (simplex.back() - simplex.front()).norm() < 1e-12) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t k = 0; k + 1 < simplex.size(); ++k) centroid += simplex[k];
    centroid /= static_cast<double>(dim);
    const Eigen::VectorXd worst = simplex.back();
    const Eigen::VectorXd reflected = centroid + (centroid - worst);
    const double fr = f(reflected);
    if (fr < values.front()) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - worst);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex.back() = expanded;
        values.back() = fe;
      } else {
        simplex.back() = reflected;
        values.back() = fr;
      }
      continue;
    }
    if (fr < values[values.size() - 2]) {
      simplex.back() = reflected;
      values.back() = fr;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + 0.5 * (worst - centroid);
    const double fc = f(contracted);
    if (fc < values.back()) {
      simplex.back() = contracted;
      values.back() = fc;
      continue;
    }
    for (std::size_t k = 1; k < simplex.size(); ++k) {
      simplex[k] = simplex.front() + 0.5 * (simplex[k] - simplex.front());
      values[k] = f(simplex[k]);
    }
  }
  order();
  return simplex.front();
}

double compute_stability_limit(const std::vector<double>& alphas, double beta) {
  auto stable_at = [&](double x) { return roots_stable(roots_of(alphas, beta, -x)); };
  if (!stable_at(0.0)) return 0.0;
  const double step = 1e-3;
  double lo = 0.0;
  double hi = -1.0;
  for (double x = step; x <= 4.0 + 1e-12; x += step) {
    if (!stable_at(x)) {
      hi = x;
      break;
    }
    lo = x;
  }
  if (hi < 0.0) return lo;
  for (int k = 0; k < 40; ++k) {
    const double mid = 0.5 * (lo + hi);
    (stable_at(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

double FormulaCoefficients::order_residual() const {
  const int s = past_points;
  const Eigen::MatrixXd a = order_matrix(order, s);
  Eigen::VectorXd x(s + 1);
  for (int i = 0; i < s; ++i) x(i) = alphas[static_cast<std::size_t>(i)];
  x(s) = beta;
  return (a * x - Eigen::VectorXd::Ones(order + 1)).cwiseAbs().maxCoeff();
}

std::vector<Complex> characteristic_roots(const FormulaCoefficients& f, double h_lambda) {
  return roots_of(f.alphas, f.beta, h_lambda);
}

FormulaCoefficients derive_formula(int j, int s) {
  if (j < 1 || s < 1) throw InvalidArgument("derive_formula: order and past points must be >= 1");
  if (j > s) {
    std::ostringstream os;
    os << "derive_formula: order " << j << " is infeasible with " << s << " past points; maximal achievable order is "
       << s;
    throw NumericalError(os.str());
  }
  const Eigen::MatrixXd a = order_matrix(j, s);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(j + 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd particular = svd.solve(rhs);
  const int free_dims = s - j;
  const Eigen::MatrixXd null_space = svd.matrixV().rightCols(free_dims);

  auto unpack = [s](const Eigen::VectorXd& x) {
    std::vector<double> alphas(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) alphas[static_cast<std::size_t>(i)] = x(i);
    return std::make_pair(alphas, x(s));
  };

  Eigen::VectorXd best = particular;
  if (free_dims > 0) {
    auto objective = [&](const Eigen::VectorXd& c) {
      const Eigen::VectorXd x = particular + null_space * c;
      auto [alphas, beta] = unpack(x);
      return parasitic_radius(roots_of(alphas, beta, 0.0));
    };
    // Deterministic multi-start: origin plus signed axis offsets at two scales.
    std::vector<Eigen::VectorXd> starts{Eigen::VectorXd::Zero(free_dims)};
    for (double scale : {1.0, 3.0}) {
      for (int k = 0; k < free_dims; ++k) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd c = Eigen::VectorXd::Zero(free_dims);
          c(k) = sign * scale;
          starts.push_back(c);
        }
      }
    }
    Eigen::VectorXd best_c = starts.front();
    double best_value = objective(best_c);
    for (const auto& start : starts) {
      Eigen::VectorXd c = nelder_mead(objective, start, 0.5, 4000);
      c = nelder_mead(objective, c, 0.05, 4000);
      const double value = objective(c);
      if (value < best_value - 1e-12) {
        best_value = value;
        best_c = c;
      }
    }
    best = particular + null_space * best_c;
  }

  FormulaCoefficients f;
  f.order = j;
  f.past_points = s;
  std::tie(f.alphas, f.beta) = unpack(best);
  const auto roots = roots_of(f.alphas, f.beta, 0.0);
  f.parasitic_radius = parasitic_radius(roots);
  f.stability_ok = roots_stable(roots);
  f.stability_limit = f.stability_ok ? compute_stability_limit(f.alphas, f.beta) : 0.0;
  return f;
}

std::vector<std::pair<int, int>> shipped_formulas() {
  return {{1, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 6}};
}

FormulaCoefficients stable_formula_at_most(int j, int s) {
  if (j < 1 || s < 1) throw InvalidArgument("formula order and past points must be >= 1");
  for (int order = std::min(j, s); order >= 1; --order) {
    FormulaCoefficients f = derive_formula(order, s);
    if (f.stability_ok) return f;
  }
  throw NumericalError("no zero-stable look-ahead formula with the requested past points");
}

}  // namespace eigencurve
