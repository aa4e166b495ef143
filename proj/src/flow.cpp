#include "eigencurve/flow.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "eigencurve/errors.hpp"

namespace eigencurve {

namespace {

void require_finite(double t, const std::string& who) {
  if (!std::isfinite(t)) {
    std::ostringstream os;
    os << who << ": parameter t must be finite (got " << t << ")";
    throw DomainError(os.str());
  }
}

CMatrix block_diagonal(const std::vector<CMatrix>& blocks, int n) {
  CMatrix out = CMatrix::Zero(n, n);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.block(offset, offset, b.rows(), b.cols()) = b;
    offset += b.rows();
  }
  return out;
}

}  // namespace

MatrixFlow::MatrixFlow(std::string name, int n, Field field, Structure structure, MatrixFunction eval,
                       MatrixFunction deval, FlowParams params)
    : name_(std::move(name)),
      n_(n),
      field_(field),
      structure_(structure),
      eval_(std::move(eval)),
      deval_(std::move(deval)),
      params_(std::move(params)) {
  if (n_ <= 0) throw InvalidArgument("MatrixFlow: dimension must be positive");
  if (!eval_) throw InvalidArgument("MatrixFlow: missing evaluator");
}

CMatrix MatrixFlow::evaluate(double t) const {
  require_finite(t, name_);
  CMatrix m = eval_(t);
  if (m.rows() != n_ || m.cols() != n_) throw InvalidArgument(name_ + ": evaluator returned wrong dimension");
  return m;
}

CMatrix MatrixFlow::derivative(double t) const {
  require_finite(t, name_);
  if (deval_) return deval_(t);
  return central_difference(*this, t, 1e-6 * std::max(1.0, std::abs(t)));
}

MatrixFlow MatrixFlow::renamed(std::string name) const {
  MatrixFlow copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

MatrixFlow MatrixFlow::with_params(FlowParams params) const {
  MatrixFlow copy = *this;
  copy.params_ = std::move(params);
  return copy;
}

CMatrix central_difference(const MatrixFlow& flow, double t, double h) {
  return (flow.evaluate(t + h) - flow.evaluate(t - h)) / (2.0 * h);
}

// --- similarities ----------------------------------------------------------

struct SeededNormal::State {
  std::mt19937_64 engine;
  bool has_spare = false;
  double spare = 0.0;
};

SeededNormal::SeededNormal(std::uint64_t seed) : state_(std::make_shared<State>()) {
  state_->engine.seed(seed);
}

double SeededNormal::operator()() {
  // Box-Muller on 53-bit uniforms; std::normal_distribution is not portable.
  if (state_->has_spare) {
    state_->has_spare = false;
    return state_->spare;
  }
  auto uniform = [this] { return static_cast<double>(state_->engine() >> 11) * 0x1.0p-53; };
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  state_->spare = r * std::sin(theta);
  state_->has_spare = true;
  return r * std::cos(theta);
}

void SimilarityMatrix::validate() const {
  const auto n = matrix.rows();
  if (n != matrix.cols() || n == 0) throw InvalidArgument("similarity matrix must be square and non-empty");
  if (!all_finite(matrix)) throw DomainError("similarity matrix has non-finite entries");
  switch (kind) {
    case SimilarityKind::Orthogonal:
      if (matrix.imag().cwiseAbs().maxCoeff() > 0.0)
        throw InvalidArgument("orthogonal similarity must be real");
      [[fallthrough]];
    case SimilarityKind::Unitary: {
      const double err = (matrix * matrix.adjoint() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
      if (err > 1e-13) throw InvalidArgument("similarity is not unitary to 1e-13");
      break;
    }
    case SimilarityKind::GeneralInvertible: {
      Eigen::FullPivLU<CMatrix> lu(matrix);
      if (!lu.isInvertible() || !(lu.rcond() > 1e-14)) throw NumericalError("similarity matrix is singular");
      break;
    }
  }
}

namespace {

CMatrix haar_q(CMatrix g) {
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex d = r(k, k);
    const double a = std::abs(d);
    if (a > 0.0) q.col(k) *= d / a;
  }
  return q;
}

}  // namespace

SimilarityMatrix random_unitary(int n, std::uint64_t seed) {
  if (n <= 0) throw InvalidArgument("random_unitary: n must be positive");
  SeededNormal normal(seed);
  CMatrix g(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      const double re = normal();
      g(r, c) = Complex(re, normal());
    }
  return {haar_q(g), SimilarityKind::Unitary};
}

SimilarityMatrix random_orthogonal(int n, std::uint64_t seed) {
  if (n <= 0) throw InvalidArgument("random_orthogonal: n must be positive");
  SeededNormal normal(seed);
  CMatrix g(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) g(r, c) = Complex(normal(), 0.0);
  CMatrix q = haar_q(g);
  q = q.real().cast<Complex>();
  return {q, SimilarityKind::Orthogonal};
}

MatrixFlow conjugate(const MatrixFlow& flow, const SimilarityMatrix& s) {
  s.validate();
  if (s.matrix.rows() != flow.dimension()) throw InvalidArgument("conjugate: similarity dimension mismatch");
  const bool unitary = s.kind != SimilarityKind::GeneralInvertible;
  const CMatrix right = s.matrix;
  const CMatrix left = unitary ? CMatrix(s.matrix.adjoint()) : CMatrix(s.matrix.fullPivLu().inverse());

  const Structure structure =
      (unitary && flow.is_hermitean()) ? Structure::Hermitean : Structure::General;
  const bool real_similarity = s.matrix.imag().cwiseAbs().maxCoeff() == 0.0;
  const Field field = (flow.field() == Field::Real && real_similarity) ? Field::Real : Field::Complex;

  MatrixFunction eval = [flow, left, right](double t) -> CMatrix { return left * flow.evaluate(t) * right; };
  MatrixFunction deval = [flow, left, right](double t) -> CMatrix { return left * flow.derivative(t) * right; };
  return MatrixFlow(flow.name(), flow.dimension(), field, structure, std::move(eval), std::move(deval),
                    flow.params());
}

MatrixFlow block_join(const std::vector<MatrixFlow>& flows) {
  if (flows.empty()) throw InvalidArgument("block_join: empty flow list");
  if (flows.size() == 1) return flows.front();
  int n = 0;
  bool all_real = true;
  bool all_hermitean = true;
  std::string name;
  for (const auto& f : flows) {
    n += f.dimension();
    all_real = all_real && f.field() == Field::Real;
    all_hermitean = all_hermitean && f.is_hermitean();
    name += (name.empty() ? "" : "+") + f.name();
  }
  MatrixFunction eval = [flows, n](double t) {
    std::vector<CMatrix> blocks;
    for (const auto& f : flows) blocks.push_back(f.evaluate(t));
    return block_diagonal(blocks, n);
  };
  MatrixFunction deval = [flows, n](double t) {
    std::vector<CMatrix> blocks;
    for (const auto& f : flows) blocks.push_back(f.derivative(t));
    return block_diagonal(blocks, n);
  };
  return MatrixFlow(name, n, all_real ? Field::Real : Field::Complex,
                    all_hermitean ? Structure::Hermitean : Structure::General, std::move(eval), std::move(deval));
}

MatrixFlow hermitize(const MatrixFlow& flow) {
  MatrixFunction eval = [flow](double t) -> CMatrix {
    const CMatrix a = flow.evaluate(t);
    return a + a.adjoint();
  };
  MatrixFunction deval = [flow](double t) -> CMatrix {
    const CMatrix d = flow.derivative(t);
    return d + d.adjoint();
  };
  return MatrixFlow(flow.name(), flow.dimension(), flow.field(), Structure::Hermitean, std::move(eval),
                    std::move(deval), flow.params());
}

MatrixFlow scalar_shift(const MatrixFlow& flow, int first, int last, Complex delta) {
  if (first < 1 || last > flow.dimension() || first > last) {
    std::ostringstream os;
    os << "scalar_shift: index range [" << first << ", " << last << "] outside 1.." << flow.dimension();
    throw InvalidArgument(os.str());
  }
  if (!std::isfinite(delta.real()) || !std::isfinite(delta.imag()))
    throw DomainError("scalar_shift: shift must be finite");
  const bool real_delta = delta.imag() == 0.0;
  const Structure structure = (flow.is_hermitean() && real_delta) ? Structure::Hermitean : Structure::General;
  const Field field = (flow.field() == Field::Real && real_delta) ? Field::Real : Field::Complex;
  MatrixFunction eval = [flow, first, last, delta](double t) -> CMatrix {
    CMatrix a = flow.evaluate(t);
    for (int k = first - 1; k < last; ++k) a(k, k) -= delta;
    return a;
  };
  MatrixFunction deval = [flow](double t) -> CMatrix { return flow.derivative(t); };
  return MatrixFlow(flow.name(), flow.dimension(), field, structure, std::move(eval), std::move(deval),
                    flow.params());
}

}  // namespace eigencurve
