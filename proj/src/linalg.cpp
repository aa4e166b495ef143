#include "eigencurve/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "eigencurve/errors.hpp"

namespace eigencurve {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void sort_pairs(std::vector<EigenPair>& pairs, double scale) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    return a.value.real() > b.value.real();
  });
  // Real parts that agree to rounding are ordered by the imaginary part.
  const double tie = 1e-12 * std::max(1.0, scale);
  std::size_t begin = 0;
  while (begin < pairs.size()) {
    std::size_t end = begin + 1;
    while (end < pairs.size() &&
           std::abs(pairs[end].value.real() - pairs[begin].value.real()) <= tie) {
      ++end;
    }
    std::stable_sort(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                     pairs.begin() + static_cast<std::ptrdiff_t>(end),
                     [](const EigenPair& a, const EigenPair& b) {
                       return a.value.imag() > b.value.imag();
                     });
    begin = end;
  }
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Replace numerically defective clusters by their mean (see header).
void snap_defective_clusters(const CMatrix& m, std::vector<EigenPair>& pairs, double norm) {
  const int n = static_cast<int>(pairs.size());
  const double gap_tol = 4.0 * std::sqrt(kEps) * std::max(norm, 1e-300);
  UnionFind uf(n);
  bool any = false;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(pairs[i].value - pairs[j].value) > gap_tol) continue;
      const double overlap = std::abs(pairs[i].vector.dot(pairs[j].vector));
      if (overlap >= 1.0 - 1e-6) {
        uf.unite(i, j);
        any = true;
      }
    }
  }
  if (!any) return;

  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) clusters[uf.find(i)].push_back(i);
  for (const auto& members : clusters) {
    if (members.size() < 2) continue;
    Complex mean{0.0, 0.0};
    for (int i : members) mean += pairs[i].value;
    mean /= static_cast<double>(members.size());
    CMatrix shifted = m;
    shifted.diagonal().array() -= mean;
    Eigen::JacobiSVD<CMatrix> svd(shifted, Eigen::ComputeFullV);
    CVector v = svd.matrixV().col(svd.matrixV().cols() - 1);
    v.normalize();
    if (eigen_residual(m, v, mean) > 1e-10 * std::max(norm, 1.0)) continue;
    for (int i : members) {
      pairs[i].value = mean;
      pairs[i].vector = v;
    }
  }
}

}  // namespace

bool all_finite(const CMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const Complex z = m(r, c);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

double eigen_residual(const CMatrix& m, const CVector& v, Complex lambda) {
  return (m * v - lambda * v).norm();
}

std::vector<EigenPair> static_eigen(const CMatrix& m, bool hermitean) {
  if (m.rows() != m.cols()) throw InvalidArgument("static_eigen: matrix is not square");
  if (!all_finite(m)) throw DomainError("static_eigen: matrix has non-finite entries");
  const Eigen::Index n = m.rows();
  std::vector<EigenPair> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  if (n == 0) return pairs;
  const double norm = m.norm();

  if (hermitean) {
    const CMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("static_eigen: hermitean solver failed");
    for (Eigen::Index k = 0; k < n; ++k) {
      pairs.push_back({Complex(solver.eigenvalues()(k), 0.0), solver.eigenvectors().col(k).normalized()});
    }
  } else {
    Eigen::ComplexEigenSolver<CMatrix> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("static_eigen: eigensolver failed");
    for (Eigen::Index k = 0; k < n; ++k) {
      pairs.push_back({solver.eigenvalues()(k), solver.eigenvectors().col(k).normalized()});
    }
    snap_defective_clusters(m, pairs, norm);
  }
  sort_pairs(pairs, norm);
  return pairs;
}

std::vector<Complex> static_eigenvalues(const CMatrix& m, bool hermitean) {
  std::vector<Complex> out;
  for (auto& p : static_eigen(m, hermitean)) out.push_back(p.value);
  return out;
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw InvalidArgument("min_cost_assignment: cost matrix is not square");
  if (n == 0) return {};
  // Potentials formulation, 1-based with a sentinel column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

std::vector<int> greedy_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<std::tuple<double, int, int>> entries;
  entries.reserve(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) entries.emplace_back(cost(r, c), r, c);
  std::sort(entries.begin(), entries.end());
  std::vector<int> col(static_cast<std::size_t>(n), -1);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  int assigned = 0;
  for (const auto& [c, r, k] : entries) {
    if (col[r] >= 0 || taken[k]) continue;
    col[r] = k;
    taken[k] = 1;
    if (++assigned == n) break;
  }
  return col;
}

}  // namespace eigencurve
