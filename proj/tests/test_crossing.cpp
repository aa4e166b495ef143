#include <doctest.h>

#include <random>

#include "eigencurve/crossing.hpp"
#include "eigencurve/errors.hpp"
#include "eigencurve/gallery.hpp"
#include "eigencurve/tracker.hpp"
#include "support.hpp"

using namespace eigencurve;

namespace {

TraceSet synthetic(double t0, double tf, double tau, const std::vector<std::function<Complex(double)>>& curves) {
  const auto grid = sample_grid(t0, tf, tau);
  TraceSet out;
  int index = 1;
  for (const auto& c : curves) {
    EigencurveTrace tr;
    tr.curve_index = index++;
    tr.times = grid;
    for (double t : grid) tr.values.push_back(c(t));
    tr.provenance = Provenance::Oracle;
    out.push_back(std::move(tr));
  }
  return out;
}

// Independent crossing oracle: pairs whose difference changes sign between
// consecutive samples.
std::set<CurvePair> sign_change_pairs(const TraceSet& traces) {
  std::set<CurvePair> out;
  for (std::size_t a = 0; a < traces.size(); ++a)
    for (std::size_t b = a + 1; b < traces.size(); ++b)
      for (std::size_t k = 1; k < traces[a].values.size(); ++k) {
        const double d0 = traces[a].values[k - 1].real() - traces[b].values[k - 1].real();
        const double d1 = traces[a].values[k].real() - traces[b].values[k].real();
        if (d0 * d1 < 0) out.insert({static_cast<int>(a) + 1, static_cast<int>(b) + 1});
      }
  return out;
}

const std::set<CurvePair> kStackexchangePairs{{1, 2}, {1, 3}, {1, 5}, {1, 6}, {2, 3}, {2, 5}, {3, 5}, {4, 5}, {4, 6}};

}  // namespace

TEST_SUITE("crossing_analysis") {
  TEST_CASE("t and -t cross once at 0") {
    const auto tr = synthetic(-1, 1, 1e-2, {[](double t) { return Complex(t); }, [](double t) { return Complex(-t); }});
    const auto cs = detect_crossings(tr);
    REQUIRE(cs.crossings.size() == 1);
    CHECK(cs.crossings[0].i == 1);
    CHECK(cs.crossings[0].j == 2);
    CHECK(std::abs(cs.crossings[0].t_star) < 1e-12);
  }

  TEST_CASE("stackexchange6 oracle traces give the reference crossing pairs") {
    const auto tr = oracle_trace(gallery("stackexchange6", 7, true), -0.3, 0.1, 1e-4);
    const auto cs = detect_crossings(tr);
    CHECK(cs.pairs() == kStackexchangePairs);
    CHECK(sign_change_pairs(tr) == kStackexchangePairs);
  }

  TEST_CASE("diag5 oracle traces: every pair crosses on [0,6]") {
    const auto tr = oracle_trace(gallery("diag5", 3, true), 0.0, 6.0, 1e-3);
    std::set<CurvePair> all;
    for (int a = 1; a <= 5; ++a)
      for (int b = a + 1; b <= 5; ++b) all.insert({a, b});
    CHECK(detect_crossings(tr).pairs() == all);
  }

  TEST_CASE("build_R1 layout") {
    const auto empty = build_R1(CrossingSet{}, 3);
    CHECK(empty.rows == std::vector<std::vector<int>>{{1, 0, 0, 0}, {2, 0, 0, 0}});

    const auto fig2 = make_R1(11, {{1, {2, 3}}, {3, {4}}, {4, {5, 6}}, {6, {7}}, {7, {8}}, {10, {11}}});
    REQUIRE(fig2.rows.size() == 10);
    CHECK(fig2.rows[0][0] == 1);
    CHECK(fig2.rows[0][1] == 2);
    CHECK(fig2.rows[0][2] == 3);
    CHECK(fig2.rows[0][3] == 0);
    CHECK(fig2.rows[2] == std::vector<int>{3, 4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    CHECK(fig2.rows[3][0] == 4);
    CHECK(fig2.rows[3][1] == 5);
    CHECK(fig2.rows[3][2] == 6);
    CHECK(fig2.rows[9][1] == 11);
    CHECK(fig2.rows[0].size() == 12);

    const auto fig3 = make_R1(11, {{1, {2}}, {2, {3}}, {3, {5}}, {4, {5}}, {5, {6}}, {6, {8}}, {7, {8}}, {10, {11}}});
    CHECK(fig3.rows[0][1] == 2);
    CHECK(fig3.rows[0][2] == 0);
    CHECK(fig3.rows[5][0] == 6);
    CHECK(fig3.rows[5][1] == 8);

    CrossingSet cs;
    for (const auto& [i, j] : parse_R1(fig2)) cs.crossings.push_back({i, j, 0.0, 0.0, 0.0});
    CHECK(build_R1(cs, 11) == fig2);
  }

  TEST_CASE("malformed R1 is rejected") {
    R1Matrix bad{3, {{1, 5, 0, 0}, {2, 0, 0, 0}}};
    CHECK_THROWS_AS(validate_R1(bad), FormatError);
    R1Matrix below{3, {{1, 0, 0, 0}, {2, 1, 0, 0}}};
    CHECK_THROWS_AS(validate_R1(below), FormatError);
    R1Matrix short_rows{3, {{1, 0, 0, 0}}};
    CHECK_THROWS_AS(validate_R1(short_rows), FormatError);
  }

  TEST_CASE("near approaches and buckets") {
    const auto constant = synthetic(0, 1, 1e-2, {[](double) { return Complex(2); }, [](double) { return Complex(1); }});
    const auto rc = near_approach(constant);
    REQUIRE(rc.entries.size() == 1);
    CHECK(rc.entries[0].d_min == doctest::Approx(1.0));
    REQUIRE(rc.entries[0].bucket);
    CHECK(*rc.entries[0].bucket == 1.0);

    const auto cross = synthetic(-1, 1, 1e-2, {[](double t) { return Complex(t); }, [](double t) { return Complex(-t); }});
    const auto rx = near_approach(cross);
    CHECK(rx.entries[0].d_min < 1e-12);
    CHECK(std::abs(rx.entries[0].t_min) < 1e-9);

    CHECK(bucket_for(0.5) == 1.0);
    CHECK(bucket_for(5e-3) == 1e-2);
    CHECK(bucket_for(1e-5) == 1e-4);
    CHECK(bucket_for(1e-9) == 1e-6);
    CHECK_FALSE(bucket_for(2.0).has_value());
  }

  TEST_CASE("parabolic refinement locates an off-grid complex minimum") {
    // |(t - 0.123456) + 1e-3 i| has its minimum 1e-3 between samples.
    const auto tr = synthetic(-1, 1, 1e-2, {[](double t) { return Complex(t - 0.123456, 1e-3); },
                                            [](double) { return Complex(0.0); }});
    const auto e = near_approach(tr).entries[0];
    CHECK(e.d_min == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(e.t_min == doctest::Approx(0.123456).epsilon(1e-6));
  }

  TEST_CASE("b10 obscured: closest pair near 7.6e-3, 0.8174 after t0") {
    ZNNConfig cfg;
    cfg.tau = 1e-4;
    const auto tr = trace(gallery("b10", 7, true), -1.0, 4.0, cfg);
    const auto& c = near_approach(tr).closest();
    CHECK(c.d_min >= 6.8e-3);
    CHECK(c.d_min <= 8.4e-3);
    CHECK(c.t_min - (-1.0) >= 0.807);
    CHECK(c.t_min - (-1.0) <= 0.827);
  }

  TEST_CASE("minimize_eigen_gap finds the b10 near pass and the shifted coincidence") {
    const auto b10 = gallery("b10", 7, true);
    const auto pm = minimize_eigen_gap(b10, -0.2, -0.16);
    CHECK(pm.distance == doctest::Approx(7.646e-3).epsilon(1e-3));
    // Identify which of the two values comes from the 6x6 block.
    const auto a6 = support::general_spectrum(gallery("a6").evaluate(pm.t));
    const auto dist = [&](Complex v) {
      double d = 1e300;
      for (const auto& w : a6) d = std::min(d, std::abs(v - w));
      return d;
    };
    const bool first_in_a6 = dist(pm.first) < dist(pm.second);
    const Complex delta = first_in_a6 ? pm.first - pm.second : pm.second - pm.first;
    const auto shifted = scalar_shift(gallery("a10"), 1, 6, delta);
    CHECK(minimize_eigen_gap(shifted, pm.t - 0.01, pm.t + 0.01).distance < 1e-12);
  }

  TEST_CASE("touch suggestions") {
    const double eps = 1e-2;
    const auto hyper = synthetic(-1, 1, 1e-3, {[eps](double t) { return Complex(std::sqrt(t * t + eps * eps)); },
                                                [eps](double t) { return Complex(-std::sqrt(t * t + eps * eps)); }});
    const auto s = suggest_touch(hyper);
    REQUIRE(s.size() == 1);
    CHECK(s[0].i == 1);
    CHECK(s[0].j == 2);
    CHECK(s[0].score >= 0.9);
    CHECK(std::abs(s[0].t_min) < 2e-3);

    const auto parallel = synthetic(0, 1, 1e-3, {[](double) { return Complex(1); }, [](double) { return Complex(0); }});
    TouchOptions tight;
    tight.gap_threshold = 0.1;
    CHECK(suggest_touch(parallel, tight).empty());

    // A genuine crossing is not an avoidance.
    const auto x = synthetic(-1, 1, 1e-3, {[](double t) { return Complex(t); }, [](double t) { return Complex(-t); }});
    CHECK(suggest_touch(x).empty());

    TouchOptions fine;
    fine.gap_threshold = 1e-2;
    CHECK(suggest_touch(oracle_trace(gallery("diag5", 3, true), 0.0, 6.0, 1e-3), fine).empty());
  }

  TEST_CASE("property: crossing symmetry and R1 round trip on random line arrangements") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + trial % 7;
      std::vector<std::function<Complex(double)>> curves;
      for (int k = 0; k < n; ++k) {
        const double a = u(rng), b = u(rng);
        curves.push_back([a, b](double t) { return Complex(a + b * t); });
      }
      const auto tr = synthetic(-1, 1, 1e-3, curves);
      const auto cs = detect_crossings(tr);
      CHECK(cs.pairs() == sign_change_pairs(tr));
      for (const auto& c : cs.crossings) CHECK(c.i < c.j);
      const auto r1 = build_R1(cs, n);
      CHECK_NOTHROW(validate_R1(r1));
      CHECK(parse_R1(r1) == cs.pairs());

      // Reversing the curve order mirrors every pair.
      TraceSet reversed(tr.rbegin(), tr.rend());
      for (int k = 0; k < n; ++k) reversed[static_cast<std::size_t>(k)].curve_index = k + 1;
      std::set<CurvePair> mirrored;
      for (const auto& [i, j] : detect_crossings(reversed).pairs()) mirrored.insert({n + 1 - j, n + 1 - i});
      CHECK(mirrored == cs.pairs());
    }
  }

  TEST_CASE("property: grid refinement moves crossing times by at most tau") {
    const auto f = gallery("stackexchange6", 7, true);
    const auto coarse = detect_crossings(oracle_trace(f, -0.3, 0.1, 2e-4));
    const auto fine = detect_crossings(oracle_trace(f, -0.3, 0.1, 1e-4));
    REQUIRE(coarse.crossings.size() == fine.crossings.size());
    for (std::size_t k = 0; k < fine.crossings.size(); ++k) {
      CHECK(coarse.crossings[k].i == fine.crossings[k].i);
      CHECK(coarse.crossings[k].j == fine.crossings[k].j);
      CHECK(std::abs(coarse.crossings[k].t_star - fine.crossings[k].t_star) <= 2e-4);
    }
    const auto b = gallery("b10", 7, true);
    const auto d_coarse = near_approach(oracle_trace(b, -0.5, 0.2, 2e-3)).closest();
    const auto d_fine = near_approach(oracle_trace(b, -0.5, 0.2, 1e-3)).closest();
    CHECK(std::abs(d_coarse.d_min - d_fine.d_min) <= 1e-2 * d_fine.d_min);
  }

  TEST_CASE("property: ZNN and oracle crossing sets coincide on hermitean gallery flows") {
    for (const auto& [name, lo, hi] : std::vector<std::tuple<std::string, double, double>>{
             {"stackexchange6", -0.3, 0.1}, {"diag5", 0.0, 6.0}, {"hermitean11_analog", 0.0, 6.0}}) {
      CAPTURE(name);
      const auto f = gallery(name, 4, true);
      CHECK(detect_crossings(trace(f, lo, hi, ZNNConfig{})).pairs() ==
            detect_crossings(oracle_trace(f, lo, hi, 1e-3)).pairs());
    }
  }
}
