#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace eigencurve {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct EigenPair {
  Complex value;
  CVector vector;  // unit 2-norm
};

/// Full eigendecomposition of a square matrix, sorted by descending real part,
/// ties (within 1e-12 relative) by descending imaginary part, then by solver
/// order.
///
/// With `hermitean` set the matrix is symmetrized and a self-adjoint solver is
/// used, so all eigenvalues come back exactly real.
///
/// Clusters of eigenvalues whose eigenvectors are numerically parallel (a
/// defective eigenvalue, e.g. a 2x2 Jordan block) are split by roughly
/// sqrt(eps)*||M|| in double arithmetic. Such clusters are replaced by their
/// mean, which is accurate to O(eps*||M||), paired with the smallest singular
/// vector of M - mean*I; the replacement is only accepted when that vector
/// satisfies the residual bound.
///
/// Throws DomainError on non-finite entries, InvalidArgument on non-square
/// input.
std::vector<EigenPair> static_eigen(const CMatrix& m, bool hermitean = false);

/// Eigenvalues only, same ordering as static_eigen.
std::vector<Complex> static_eigenvalues(const CMatrix& m, bool hermitean = false);

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method).
/// Returns `col[row]`.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Greedy assignment used for large problems: repeatedly takes the globally
/// cheapest remaining (row, col) pair.
std::vector<int> greedy_assignment(const Eigen::MatrixXd& cost);

/// Residual ||M v - lambda v||_2.
double eigen_residual(const CMatrix& m, const CVector& v, Complex lambda);

bool all_finite(const CMatrix& m);

}  // namespace eigencurve
