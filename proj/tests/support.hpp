#pragma once
// Independent reference computations for the test suites. Nothing here calls
// into the algorithms under test beyond the flow evaluators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace support {

using Complex = std::complex<double>;
using Pair = std::pair<int, int>;

// Sorted real spectrum of a hermitean matrix (Eigen's self-adjoint solver).
inline std::vector<double> hermitean_spectrum(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Complex> general_spectrum(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

// Largest distance of a greedy nearest-neighbour pairing between two multisets;
// adequate when the points are well separated compared with the errors.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b, bool relative = false) {
  double worst = 0.0;
  for (const Complex& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const Complex& p, const Complex& q) { return std::abs(p - x) < std::abs(q - x); });
    double d = std::abs(*it - x);
    if (relative) d /= std::max(1.0, std::abs(x));
    worst = std::max(worst, d);
    b.erase(it);
  }
  return worst;
}

// Roots of the polynomial with coefficients c[0] z^m + c[1] z^{m-1} + ... + c[m]
// through the eigenvalues of its companion matrix.
inline std::vector<Complex> polynomial_roots(const std::vector<double>& c) {
  const int m = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) comp(0, k) = -c[static_cast<std::size_t>(k + 1)] / c[0];
  for (int k = 1; k < m; ++k) comp(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + m};
}

// Propagates z(t) = t^m with the explicit update
//   z_{k+1} = sum_i alphas[i] z_{k-i} + tau * beta * zdot_k
// seeded with exact history; returns the worst deviation from t^m over `steps`.
inline double polynomial_propagation_error(const std::vector<double>& alphas, double beta, int m, int steps,
                                           double tau = 0.01) {
  const int s = static_cast<int>(alphas.size());
  const auto exact = [m](double t) { return std::pow(t, m); };
  const auto slope = [m](double t) { return m == 0 ? 0.0 : m * std::pow(t, m - 1); };
  std::vector<double> z;
  for (int k = 0; k < s; ++k) z.push_back(exact(k * tau));
  double worst = 0.0;
  for (int k = s - 1; k < s - 1 + steps; ++k) {
    double next = tau * beta * slope(k * tau);
    for (int i = 0; i < s; ++i) next += alphas[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(k - i)];
    // Propagated values are fed back, so roundoff growth through parasitic
    // roots is measured as well.
    const double t = (k + 1) * tau;
    worst = std::max(worst, std::abs(next - exact(t)) / std::max(1.0, std::abs(exact(t))));
    z.push_back(next);
  }
  return worst;
}

// real2x2 seed [[1, t], [t^2, 3]] has eigenvalues 2 +- sqrt(1 + t^3).
inline std::pair<Complex, Complex> real2x2_closed_form(double t) {
  const Complex root = std::sqrt(Complex(1.0 + t * t * t, 0.0));
  return {2.0 + root, 2.0 - root};
}

// Exhaustive minimum number of groups: curves in a crossing pair are in
// different groups, touching curves share a group, and a group never spans two
// connected components of the crossing+touch graph. Returns -1 if infeasible.
inline int brute_force_groups(const std::set<Pair>& crossings, const std::vector<Pair>& touch, int n) {
  std::vector<int> comp(static_cast<std::size_t>(n));
  std::iota(comp.begin(), comp.end(), 0);
  const std::function<int(int)> find = [&](int x) { return comp[static_cast<std::size_t>(x)] == x ? x : comp[static_cast<std::size_t>(x)] = find(comp[static_cast<std::size_t>(x)]); };
  const auto unite = [&](int a, int b) { comp[static_cast<std::size_t>(find(a))] = find(b); };
  for (const auto& [a, b] : crossings) unite(a - 1, b - 1);
  for (const auto& [a, b] : touch) unite(a - 1, b - 1);

  std::vector<int> group(static_cast<std::size_t>(n), -1);
  std::vector<int> group_comp;
  int best = -1;
  const std::function<void(int, int)> assign = [&](int k, int used) {
    if (best >= 0 && used >= best) return;
    if (k == n) {
      best = used;
      return;
    }
    for (int g = 0; g <= used; ++g) {
      if (g < used && group_comp[static_cast<std::size_t>(g)] != find(k)) continue;
      bool ok = true;
      for (const auto& [a, b] : crossings) {
        const int other = a - 1 == k ? b - 1 : b - 1 == k ? a - 1 : -1;
        if (other >= 0 && other < k && group[static_cast<std::size_t>(other)] == g) ok = false;
      }
      for (const auto& [a, b] : touch) {
        const int other = a - 1 == k ? b - 1 : b - 1 == k ? a - 1 : -1;
        if (other >= 0 && other < k && group[static_cast<std::size_t>(other)] != g) ok = false;
      }
      if (!ok) continue;
      group[static_cast<std::size_t>(k)] = g;
      if (g == used) group_comp.push_back(find(k));
      assign(k + 1, g == used ? used + 1 : used);
      if (g == used) group_comp.pop_back();
      group[static_cast<std::size_t>(k)] = -1;
    }
  };
  assign(0, 0);
  return best;
}

// A constraint set drawn from a hidden partition: crossings only across hidden
// blocks, touches only inside them.
struct ConstraintSet {
  int n = 0;
  std::vector<int> hidden;  // block id per curve
  std::set<Pair> crossings;
  std::vector<Pair> touch;
};

inline ConstraintSet random_constraint_set(std::mt19937_64& rng) {
  ConstraintSet c;
  c.n = std::uniform_int_distribution<int>(2, 10)(rng);
  const int blocks = std::uniform_int_distribution<int>(1, c.n)(rng);
  for (int k = 0; k < c.n; ++k) c.hidden.push_back(std::uniform_int_distribution<int>(0, blocks - 1)(rng));
  const double p_cross = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
  const double p_touch = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
  std::bernoulli_distribution cross(p_cross), touch(p_touch);
  for (int a = 1; a <= c.n; ++a)
    for (int b = a + 1; b <= c.n; ++b) {
      if (c.hidden[static_cast<std::size_t>(a - 1)] != c.hidden[static_cast<std::size_t>(b - 1)]) {
        if (cross(rng)) c.crossings.insert({a, b});
      } else if (touch(rng)) {
        c.touch.emplace_back(a, b);
      }
    }
  std::shuffle(c.touch.begin(), c.touch.end(), rng);
  return c;
}

}  // namespace support
