#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eigencurve/flow.hpp"

namespace eigencurve {

/// Names a reproducible flow: a gallery entry, its construction parameters, and
/// the seed of the similarity used to obscure it.
struct FlowRef {
  std::string name;
  std::uint64_t seed = 0;
  bool obscure = false;
  FlowParams params;

  friend bool operator==(const FlowRef&, const FlowRef&) = default;
};

/// Gallery entries:
///   stackexchange6       6x6 real symmetric, blocks 1+1+2+2 after a permutation
///   diag5                5x5 real diagonal trigonometric flow
///   a4, a6, a10          tridiagonal non-normal complex flows, a10 = diag(a6, a4)
///   b4, b6, b10          aliases of a4, a6, a10 that are always obscured
///   real2x2              [[1, t], [t^2, 3]]
///   hermitean11_analog   hermitean 7+4 block flow (see hermitean11_analog_blocks)
///   random_hermitean     dense hermitean flow, params {"n"}, coefficients from the seed
///
/// With `obscure` set the flow is conjugated by a seeded random orthogonal
/// (real flows) or unitary (complex flows) matrix. Unknown names throw
/// InvalidArgument.
MatrixFlow gallery(const std::string& name, std::uint64_t seed = 0, bool obscure = false,
                   const FlowParams& params = {});

MatrixFlow make_flow(const FlowRef& ref);

std::vector<std::string> gallery_names();

/// The unobscured hermitean 7x7 and 4x4 diagonal blocks of hermitean11_analog,
/// in that order.
std::vector<MatrixFlow> hermitean11_analog_blocks(int variant = 0);

/// Similarity used by gallery() for obscuring an n x n flow of the given field.
SimilarityMatrix obscuring_similarity(int n, Field field, std::uint64_t seed);

}  // namespace eigencurve
