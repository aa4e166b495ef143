#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eigencurve/linalg.hpp"

namespace eigencurve {

enum class Field { Real, Complex };
enum class Structure { Hermitean, General };

using MatrixFunction = std::function<CMatrix(double)>;
using FlowParams = std::map<std::string, double>;

/// A 1-parameter matrix flow t -> A(t) with its entrywise time derivative.
///
/// Flows are immutable values; copies share the underlying evaluators, which
/// must themselves be free of mutable state so that concurrent evaluation is
/// safe.
class MatrixFlow {
 public:
  /// `deval` may be empty, in which case derivative() falls back to a central
  /// difference with h = 1e-6 * max(1, |t|).
  MatrixFlow(std::string name, int n, Field field, Structure structure, MatrixFunction eval,
             MatrixFunction deval = {}, FlowParams params = {});

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return n_; }
  Field field() const noexcept { return field_; }
  Structure structure() const noexcept { return structure_; }
  bool is_hermitean() const noexcept { return structure_ == Structure::Hermitean; }
  const FlowParams& params() const noexcept { return params_; }
  bool has_analytic_derivative() const noexcept { return static_cast<bool>(deval_); }

  /// A(t). Throws DomainError for non-finite t.
  CMatrix evaluate(double t) const;
  /// dA/dt at t. Throws DomainError for non-finite t.
  CMatrix derivative(double t) const;

  CMatrix operator()(double t) const { return evaluate(t); }

  MatrixFlow renamed(std::string name) const;
  MatrixFlow with_params(FlowParams params) const;

 private:
  std::string name_;
  int n_;
  Field field_;
  Structure structure_;
  MatrixFunction eval_;
  MatrixFunction deval_;
  FlowParams params_;
};

enum class SimilarityKind { Unitary, Orthogonal, GeneralInvertible };

/// A constant similarity used to obscure a flow's block structure.
struct SimilarityMatrix {
  CMatrix matrix;
  SimilarityKind kind;

  /// Checks U U^* = I (1e-13) for unitary/orthogonal kinds, realness for the
  /// orthogonal kind, and a finite condition estimate otherwise.
  void validate() const;
};

/// Seeded Haar-distributed unitary matrix (QR of a complex Gaussian matrix).
SimilarityMatrix random_unitary(int n, std::uint64_t seed);
/// Seeded Haar-distributed real orthogonal matrix.
SimilarityMatrix random_orthogonal(int n, std::uint64_t seed);

/// S^{-1} A(t) S, with S^{-1} = S^* for unitary and orthogonal kinds.
MatrixFlow conjugate(const MatrixFlow& flow, const SimilarityMatrix& s);

/// Block-diagonal concatenation diag(A_1(t), ..., A_k(t)).
MatrixFlow block_join(const std::vector<MatrixFlow>& flows);

/// A(t) + A(t)^*, tagged hermitean.
MatrixFlow hermitize(const MatrixFlow& flow);

/// Subtracts delta * I on the principal submatrix with 1-based inclusive
/// indices [first, last].
MatrixFlow scalar_shift(const MatrixFlow& flow, int first, int last, Complex delta);

/// Central difference (A(t+h) - A(t-h)) / 2h.
CMatrix central_difference(const MatrixFlow& flow, double t, double h);

/// Deterministic normal variates from a 64-bit Mersenne twister; identical
/// across standard library implementations.
class SeededNormal {
 public:
  explicit SeededNormal(std::uint64_t seed);
  double operator()();

 private:
  struct State;
  std::shared_ptr<State> state_;
};

}  // namespace eigencurve
