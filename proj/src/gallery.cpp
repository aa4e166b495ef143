#include "eigencurve/gallery.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "eigencurve/errors.hpp"

namespace eigencurve {

namespace {

using std::cos;
using std::exp;
using std::sin;

constexpr Complex I{0.0, 1.0};
constexpr int kDefaultAnalogVariant = 0;

CMatrix tridiagonal_ones(int n) {
  CMatrix m = CMatrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    m(k, k + 1) = 1.0;
    m(k + 1, k) = 1.0;
  }
  return m;
}

MatrixFlow stackexchange6() {
  const double r = 7.0 * std::sqrt(2.0);
  auto eval = [r](double t) {
    CMatrix b = CMatrix::Zero(6, 6);
    b(0, 0) = 21.0 * t + 0.5;
    b(1, 1) = 7.0 * t + 0.5;
    b(2, 2) = 0.5 - 7.0 * t;
    b(3, 3) = 0.5 - 21.0 * t;
    b(4, 4) = 14.0 * t - 1.0;
    b(5, 5) = -14.0 * t - 1.0;
    b(1, 4) = b(4, 1) = r * t;
    b(2, 5) = b(5, 2) = r * t;
    return b;
  };
  auto deval = [r](double) {
    CMatrix b = CMatrix::Zero(6, 6);
    b(0, 0) = 21.0;
    b(1, 1) = 7.0;
    b(2, 2) = -7.0;
    b(3, 3) = -21.0;
    b(4, 4) = 14.0;
    b(5, 5) = -14.0;
    b(1, 4) = b(4, 1) = r;
    b(2, 5) = b(5, 2) = r;
    return b;
  };
  return MatrixFlow("stackexchange6", 6, Field::Real, Structure::Hermitean, eval, deval);
}

MatrixFlow diag5() {
  auto eval = [](double t) {
    CMatrix b = CMatrix::Zero(5, 5);
    b(0, 0) = sin(1.0 - t / 2.0);
    b(1, 1) = cos(t / 3.0) / 2.0;
    b(2, 2) = sin(t) * cos(-1.0 - 0.2 * t);
    b(3, 3) = cos(2.0 * t - 0.5);
    const double c = cos(1.0 + 3.0 * t);
    b(4, 4) = c * c;
    return b;
  };
  auto deval = [](double t) {
    CMatrix b = CMatrix::Zero(5, 5);
    b(0, 0) = -0.5 * cos(1.0 - t / 2.0);
    b(1, 1) = -sin(t / 3.0) / 6.0;
    b(2, 2) = cos(t) * cos(-1.0 - 0.2 * t) + 0.2 * sin(t) * sin(-1.0 - 0.2 * t);
    b(3, 3) = -2.0 * sin(2.0 * t - 0.5);
    b(4, 4) = -3.0 * sin(2.0 + 6.0 * t);
    return b;
  };
  return MatrixFlow("diag5", 5, Field::Real, Structure::Hermitean, eval, deval);
}

MatrixFlow a4() {
  auto eval = [](double t) {
    CMatrix a = tridiagonal_ones(4);
    a(0, 0) = I * (2.0 - exp(t - 1.0)) + t / 6.0;
    a(1, 1) = -2.0 - 2.0 * I * sin(t - 1.0);
    a(2, 2) = 2.0 * I - 2.0 * t;
    a(3, 3) = sin(t + 2.0) + I * t;
    return a;
  };
  auto deval = [](double t) {
    CMatrix a = CMatrix::Zero(4, 4);
    a(0, 0) = -I * exp(t - 1.0) + 1.0 / 6.0;
    a(1, 1) = -2.0 * I * cos(t - 1.0);
    a(2, 2) = -2.0;
    a(3, 3) = cos(t + 2.0) + I;
    return a;
  };
  return MatrixFlow("a4", 4, Field::Complex, Structure::General, eval, deval);
}

MatrixFlow a6() {
  auto eval = [](double t) {
    CMatrix a = tridiagonal_ones(6);
    a(0, 0) = I - 2.0 * cos(2.0 * t);
    a(1, 1) = -2.0 - 2.0 * I * sin(t - 1.0);
    a(2, 2) = 2.0 * I - t;
    a(3, 3) = I * exp(sin(t));
    a(4, 4) = t / 2.0 + sin(t) * std::cos(2.0 * I * t) / 100.0;
    a(5, 5) = t - I / 8.0 * std::cos(I * t / 3.0 - 1.0);
    return a;
  };
  auto deval = [](double t) {
    CMatrix a = CMatrix::Zero(6, 6);
    a(0, 0) = 4.0 * sin(2.0 * t);
    a(1, 1) = -2.0 * I * cos(t - 1.0);
    a(2, 2) = -1.0;
    a(3, 3) = I * cos(t) * exp(sin(t));
    // cos(2it) = cosh(2t)
    a(4, 4) = 0.5 + (cos(t) * std::cosh(2.0 * t) + 2.0 * sin(t) * std::sinh(2.0 * t)) / 100.0;
    a(5, 5) = 1.0 - std::sin(I * t / 3.0 - 1.0) / 24.0;
    return a;
  };
  return MatrixFlow("a6", 6, Field::Complex, Structure::General, eval, deval);
}

MatrixFlow real2x2() {
  auto eval = [](double t) {
    CMatrix a(2, 2);
    a << 1.0, t, t * t, 3.0;
    return a;
  };
  auto deval = [](double t) {
    CMatrix a(2, 2);
    a << 0.0, 1.0, 2.0 * t, 0.0;
    return a;
  };
  return MatrixFlow("real2x2", 2, Field::Real, Structure::General, eval, deval);
}

// Coefficient tables of the 7x7 seed B1(t) = 0.4 (A o sin(W t + P) + i B o cos(V t + Q))
// + diag(d) cos(0.3 t), all entries closed-form in the (1-based) indices.
struct AnalogSeed {
  Eigen::MatrixXd A, B, W, V, P, Q;
  Eigen::VectorXd d;
};

AnalogSeed analog_seed(int variant) {
  AnalogSeed s;
  const double v = variant;
  s.A.resize(7, 7);
  s.B.resize(7, 7);
  s.W.resize(7, 7);
  s.V.resize(7, 7);
  s.P.resize(7, 7);
  s.Q.resize(7, 7);
  s.d.resize(7);
  for (int r = 0; r < 7; ++r) {
    const double k = r + 1;
    s.d(r) = 3.0 - r;
    for (int c = 0; c < 7; ++c) {
      const double l = c + 1;
      s.A(r, c) = sin(1.3 * k * l + 0.7 * k + 0.4 * l + v);
      s.B(r, c) = cos(0.9 * k - 1.7 * l + 0.3 * k * l + v);
      s.W(r, c) = 0.2 + std::fmod(0.618 * (k + 2 * l + 3 * k * l) + 0.1 * v, 1.0);
      s.V(r, c) = 0.2 + std::fmod(0.382 * (2 * k + l + k * l) + 0.1 * v, 1.0);
      s.P(r, c) = std::fmod(2.1 * k + 0.5 * l * l + v, 6.28);
      s.Q(r, c) = std::fmod(0.8 * k * k + 1.9 * l + v, 6.28);
    }
  }
  return s;
}

CMatrix analog_b1(const AnalogSeed& s, double t) {
  CMatrix b(7, 7);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 7; ++c)
      b(r, c) = 0.4 * (s.A(r, c) * sin(s.W(r, c) * t + s.P(r, c)) + I * s.B(r, c) * cos(s.V(r, c) * t + s.Q(r, c)));
  for (int r = 0; r < 7; ++r) b(r, r) += s.d(r) * cos(0.3 * t);
  return b;
}

CMatrix analog_b1_dot(const AnalogSeed& s, double t) {
  CMatrix b(7, 7);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 7; ++c)
      b(r, c) = 0.4 * (s.A(r, c) * s.W(r, c) * cos(s.W(r, c) * t + s.P(r, c)) -
                       I * s.B(r, c) * s.V(r, c) * sin(s.V(r, c) * t + s.Q(r, c)));
  for (int r = 0; r < 7; ++r) b(r, r) -= 0.3 * s.d(r) * sin(0.3 * t);
  return b;
}

// B2(t) = diag(B1(t), 2 B1(t)(2:5, 2:5)), before hermitization.
MatrixFlow analog_seed_flow(int variant, bool small_block_only, bool large_block_only) {
  const auto seed = std::make_shared<const AnalogSeed>(analog_seed(variant));
  auto assemble = [small_block_only, large_block_only](const CMatrix& b1) -> CMatrix {
    if (large_block_only) return b1;
    const CMatrix b4 = 2.0 * b1.block(1, 1, 4, 4);
    if (small_block_only) return b4;
    CMatrix b = CMatrix::Zero(11, 11);
    b.topLeftCorner(7, 7) = b1;
    b.bottomRightCorner(4, 4) = b4;
    return b;
  };
  const int n = large_block_only ? 7 : (small_block_only ? 4 : 11);
  auto eval = [seed, assemble](double t) { return assemble(analog_b1(*seed, t)); };
  auto deval = [seed, assemble](double t) { return assemble(analog_b1_dot(*seed, t)); };
  return MatrixFlow("hermitean11_analog", n, Field::Complex, Structure::General, eval, deval,
                    {{"variant", static_cast<double>(variant)}});
}

MatrixFlow random_hermitean(int n, std::uint64_t seed) {
  if (n <= 0 || n > 256) throw InvalidArgument("random_hermitean: n must be in 1..256");
  SeededNormal normal(seed);
  std::vector<CMatrix> h;
  for (int k = 0; k < 3; ++k) {
    CMatrix g(n, n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) {
        const double re = normal();
        g(r, c) = Complex(re, normal());
      }
    h.push_back(0.5 * (g + g.adjoint()));
  }
  auto eval = [h](double t) -> CMatrix { return h[0] + sin(t) * h[1] + cos(2.0 * t / 3.0) * h[2]; };
  auto deval = [h](double t) -> CMatrix { return cos(t) * h[1] - (2.0 / 3.0) * sin(2.0 * t / 3.0) * h[2]; };
  return MatrixFlow("random_hermitean", n, Field::Complex, Structure::Hermitean, eval, deval,
                    {{"n", static_cast<double>(n)}});
}

int int_param(const FlowParams& params, const std::string& key, int fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!std::isfinite(it->second) || it->second != std::round(it->second))
    throw InvalidArgument("flow parameter '" + key + "' must be an integer");
  return static_cast<int>(it->second);
}

}  // namespace

SimilarityMatrix obscuring_similarity(int n, Field field, std::uint64_t seed) {
  return field == Field::Real ? random_orthogonal(n, seed) : random_unitary(n, seed);
}

std::vector<MatrixFlow> hermitean11_analog_blocks(int variant) {
  return {hermitize(analog_seed_flow(variant, false, true)), hermitize(analog_seed_flow(variant, true, false))};
}

std::vector<std::string> gallery_names() {
  return {"stackexchange6", "diag5", "a4", "a6", "a10", "b4", "b6", "b10", "real2x2", "hermitean11_analog",
          "random_hermitean"};
}

MatrixFlow gallery(const std::string& name, std::uint64_t seed, bool obscure, const FlowParams& params) {
  std::string base = name;
  if (name == "b4" || name == "b6" || name == "b10") {
    base = "a" + name.substr(1);
    obscure = true;
  }

  static const std::map<std::string, std::function<MatrixFlow(const FlowParams&, std::uint64_t)>> builders = {
      {"stackexchange6", [](const FlowParams&, std::uint64_t) { return stackexchange6(); }},
      {"diag5", [](const FlowParams&, std::uint64_t) { return diag5(); }},
      {"a4", [](const FlowParams&, std::uint64_t) { return a4(); }},
      {"a6", [](const FlowParams&, std::uint64_t) { return a6(); }},
      {"a10", [](const FlowParams&, std::uint64_t) { return block_join({a6(), a4()}).renamed("a10"); }},
      {"real2x2", [](const FlowParams&, std::uint64_t) { return real2x2(); }},
      {"hermitean11_analog",
       [](const FlowParams& p, std::uint64_t) {
         const int variant = int_param(p, "variant", kDefaultAnalogVariant);
         return hermitize(analog_seed_flow(variant, false, false));
       }},
      {"random_hermitean",
       [](const FlowParams& p, std::uint64_t s) { return random_hermitean(int_param(p, "n", 8), s); }},
  };

  auto it = builders.find(base);
  if (it == builders.end()) throw InvalidArgument("gallery: unknown flow '" + name + "'");
  MatrixFlow flow = it->second(params, seed);
  if (obscure) flow = conjugate(flow, obscuring_similarity(flow.dimension(), flow.field(), seed));
  FlowParams merged = flow.params();
  for (const auto& [k, v] : params) merged[k] = v;
  return flow.renamed(name).with_params(std::move(merged));
}

MatrixFlow make_flow(const FlowRef& ref) { return gallery(ref.name, ref.seed, ref.obscure, ref.params); }

}  // namespace eigencurve
