#include <doctest.h>

#include "eigencurve/errors.hpp"
#include "eigencurve/formula.hpp"
#include "eigencurve/tracker.hpp"
#include "support.hpp"

using namespace eigencurve;

namespace {

// Taylor condition for degree d at k = 0, tau = 1:
//   1 = sum_i alphas[i] (-i)^d + d * beta * 0^{d-1}.
double taylor_condition(const FormulaCoefficients& f, int d) {
  double lhs = 0.0;
  for (std::size_t i = 0; i < f.alphas.size(); ++i) lhs += f.alphas[i] * std::pow(-static_cast<double>(i), d);
  if (d == 1) lhs += f.beta;
  return std::abs(lhs - 1.0);
}

std::vector<double> characteristic_polynomial(const FormulaCoefficients& f, double h_lambda) {
  std::vector<double> c{1.0, -(f.alphas[0] + h_lambda * f.beta)};
  for (std::size_t i = 1; i < f.alphas.size(); ++i) c.push_back(-f.alphas[i]);
  return c;
}

double spectral_radius(const std::vector<Complex>& roots) {
  double r = 0.0;
  for (const auto& z : roots) r = std::max(r, std::abs(z));
  return r;
}

}  // namespace

TEST_SUITE("formula") {
  TEST_CASE("(1,1) is look-ahead Euler") {
    const auto f = derive_formula(1, 1);
    REQUIRE(f.alphas.size() == 1);
    CHECK(std::abs(f.alphas[0] - 1.0) < 1e-15);
    CHECK(std::abs(f.beta - 1.0) < 1e-15);
    CHECK(f.stability_ok);
    // z_{k+1} = (1 - x) z_k is stable up to x = 2.
    CHECK(std::abs(f.stability_limit - 2.0) < 1e-6);
  }

  TEST_CASE("(2,2) satisfies the order conditions") {
    const auto f = derive_formula(2, 2);
    double sum = 0, first = 0, second = 0;
    for (std::size_t i = 0; i < f.alphas.size(); ++i) {
      sum += f.alphas[i];
      first += -static_cast<double>(i) * f.alphas[i];
      second += static_cast<double>(i * i) * f.alphas[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(std::abs(first + f.beta - 1.0) < 1e-12);
    CHECK(std::abs(second - 1.0) < 1e-12);
  }

  TEST_CASE("infeasible and invalid requests") {
    CHECK_THROWS_AS(derive_formula(4, 3), NumericalError);
    CHECK_THROWS_AS(derive_formula(0, 3), InvalidArgument);
    CHECK_THROWS_AS(derive_formula(2, 0), InvalidArgument);
  }

  TEST_CASE("(5,6) and (5,7) are not zero-stable; (5,6) falls back to (4,6)") {
    CHECK_FALSE(derive_formula(5, 6).stability_ok);
    CHECK_FALSE(derive_formula(5, 7).stability_ok);
    const auto fb = stable_formula_at_most(5, 6);
    CHECK(fb.order == 4);
    CHECK(fb.past_points == 6);

    ZNNConfig cfg;
    cfg.order = 5;
    cfg.past_points = 6;
    cfg.tau = 1e-4;
    std::vector<std::string> notices;
    const auto used = resolve_formula(cfg, &notices);
    CHECK(used.order == 4);
    REQUIRE(notices.size() == 1);
    CHECK(notices[0].find("(4,6)") != std::string::npos);
  }

  TEST_CASE("the default (3,5) formula admits tau*eta = 0.05 and rejects 0.2") {
    const auto f = derive_formula(3, 5);
    ZNNConfig cfg;
    CHECK_NOTHROW(cfg.validate(f));
    cfg.tau = 4e-3;
    CHECK_THROWS_AS(cfg.validate(f), InvalidArgument);
  }

  TEST_CASE("property: every shipped formula passes order, exactness and root tests") {
    for (const auto& [j, s] : shipped_formulas()) {
      CAPTURE(j);
      CAPTURE(s);
      const auto f = derive_formula(j, s);
      REQUIRE(static_cast<int>(f.alphas.size()) == s);

      CHECK(f.order_residual() <= 1e-12);
      for (int d = 0; d <= j; ++d) CHECK(taylor_condition(f, d) <= 1e-12);

      for (int m = 0; m <= j; ++m) CHECK(support::polynomial_propagation_error(f.alphas, f.beta, m, 100) <= 1e-10);
      // One degree beyond the order is no longer reproduced.
      CHECK(taylor_condition(f, j + 1) > 1e-8);

      const auto roots = support::polynomial_roots(characteristic_polynomial(f, 0.0));
      CHECK(f.stability_ok);
      int on_circle = 0;
      for (const auto& z : roots) {
        CHECK(std::abs(z) <= 1.0 + 1e-9);
        if (std::abs(std::abs(z) - 1.0) < 1e-9) ++on_circle;
      }
      CHECK(on_circle == 1);
      CHECK(support::multiset_distance(characteristic_roots(f, 0.0), roots) < 1e-8);

      // Stability region along the negative real axis.
      CHECK(f.stability_limit > 0.0);
      CHECK(spectral_radius(support::polynomial_roots(characteristic_polynomial(f, -0.9 * f.stability_limit))) <= 1.0 + 1e-9);
      CHECK(spectral_radius(support::polynomial_roots(characteristic_polynomial(f, -1.1 * f.stability_limit))) > 1.0);
    }
  }

  TEST_CASE("property: order conditions hold for every feasible (j,s) up to s = 7") {
    for (int s = 1; s <= 7; ++s)
      for (int j = 1; j <= s; ++j) {
        CAPTURE(j);
        CAPTURE(s);
        const auto f = derive_formula(j, s);
        // The conditions weight coefficients by up to (s-1)^j.
        CHECK(f.order_residual() <= 1e-14 * std::max(1.0, std::pow(s - 1.0, j)));
        const auto roots = support::polynomial_roots(characteristic_polynomial(f, 0.0));
        double parasitic = 0.0;
        bool skipped_principal = false;
        for (const auto& z : roots) {
          if (!skipped_principal && std::abs(z - 1.0) < 1e-6) {
            skipped_principal = true;
            continue;
          }
          parasitic = std::max(parasitic, std::abs(z));
        }
        CHECK(skipped_principal);
        CHECK(std::abs(parasitic - f.parasitic_radius) < 1e-6);
        if (parasitic < 1.0 - 1e-9) CHECK(f.stability_ok);
        if (parasitic > 1.0 + 1e-9) CHECK_FALSE(f.stability_ok);
      }
  }
}
