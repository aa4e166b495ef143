#include <doctest.h>

#include <random>

#include "eigencurve/decomposition.hpp"
#include "eigencurve/errors.hpp"
#include "support.hpp"

using namespace eigencurve;

namespace {

R1Matrix fig2() { return make_R1(11, {{1, {2, 3}}, {3, {4}}, {4, {5, 6}}, {6, {7}}, {7, {8}}, {10, {11}}}); }
R1Matrix fig3() {
  return make_R1(11, {{1, {2}}, {2, {3}}, {3, {5}}, {4, {5}}, {5, {6}}, {6, {8}}, {7, {8}}, {10, {11}}});
}
R1Matrix six() { return make_R1(6, {{1, {2, 3, 5, 6}}, {2, {3, 5}}, {3, {5}}, {4, {5, 6}}}); }
R1Matrix five() { return make_R1(5, {{1, {2, 3, 4, 5}}, {2, {3, 4, 5}}, {3, {4, 5}}, {4, {5}}}); }

const TouchList kFig2Touch{{2, 3}, {5, 6}, {6, 8}, {9, 10}};
const TouchList kFig3Touch{{1, 3}, {3, 4}, {4, 6}, {6, 7}, {7, 9}, {9, 10}};

R1Matrix r1_of(const std::set<CurvePair>& pairs, int n) {
  std::vector<std::pair<int, std::vector<int>>> rows;
  for (const auto& [a, b] : pairs) {
    if (rows.empty() || rows.back().first != a) rows.push_back({a, {}});
    rows.back().second.push_back(b);
  }
  return make_R1(n, rows);
}

// Applies touches, dropping any row that raises TouchError and retrying.
LabelVector touch_with_retry(LabelVector ve, TouchList touch, const R1Matrix& r1, int* dropped, TouchList* kept) {
  for (;;) {
    try {
      const auto out = almost_touch(ve, touch, r1);
      if (kept) *kept = touch;
      return out;
    } catch (const TouchError& e) {
      touch.erase(touch.begin() + (e.row() - 1));
      ++*dropped;
    }
  }
}

}  // namespace

TEST_SUITE("decomposition") {
  TEST_CASE("reference label vectors") {
    CHECK(infer_labels(fig2(), 11) == LabelVector{1, -1, -1, 1, -1, -1, 1, -1, 2, 3, -3});
    CHECK(infer_labels(fig3(), 11) == LabelVector{1, -1, 1, 1, -1, 1, 1, -1, 2, 3, -3});
    CHECK(infer_labels(six(), 6) == LabelVector{1, -1, 2, 2, -2, -2});
    CHECK(infer_labels(five(), 5) == LabelVector{1, -1, 2, -2, 3});
  }

  TEST_CASE("reference Touch refinements") {
    CHECK(almost_touch(infer_labels(fig2(), 11), kFig2Touch, fig2()) ==
          LabelVector{1, -1, -1, 1, -1, -1, 1, -1, 2, 2, -2});
    CHECK(almost_touch(infer_labels(fig3(), 11), kFig3Touch, fig3()) ==
          LabelVector{1, -1, 1, 1, -1, 1, 1, -1, 1, 1, -1});
    const auto ve = infer_labels(six(), 6);
    CHECK(almost_touch(ve, {}, six()) == ve);
  }

  TEST_CASE("contradicting Touch rows name the offending row") {
    const auto r1 = make_R1(2, {{1, {2}}});
    try {
      almost_touch({1, -1}, {{1, 2}}, r1);
      FAIL("expected TouchError");
    } catch (const TouchError& e) {
      CHECK(e.row() == 1);
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    // Merging two groups that contain crossing curves fails at the second row.
    const auto ve = infer_labels(fig2(), 11);
    try {
      almost_touch(ve, {{9, 10}, {1, 9}, {1, 11}}, fig2());
      FAIL("expected TouchError");
    } catch (const TouchError& e) {
      CHECK(e.row() == 3);
    }
  }

  TEST_CASE("invalid Touch rows") {
    CHECK_THROWS_AS(validate_touch({{0, 2}}, 3), InvalidArgument);
    CHECK_THROWS_AS(validate_touch({{1, 4}}, 3), InvalidArgument);
    CHECK_THROWS_AS(validate_touch({{2, 2}}, 3), InvalidArgument);
    CHECK_THROWS_AS(validate_touch({{2, 1}}, 3), InvalidArgument);
    CHECK_THROWS_AS(validate_touch({{1, 2}, {1, 2}}, 3), InvalidArgument);
    CHECK_NOTHROW(validate_touch({{1, 2}, {2, 3}}, 3));
  }

  TEST_CASE("block structure") {
    CHECK(block_structure({1, -1, 1, 1, -1, 1, 1, -1, 1, 1, -1}).sizes == std::vector<int>{4, 7});
    CHECK(block_structure({1, -1, 2, 2, -2, -2}).sizes == std::vector<int>{1, 1, 2, 2});
    CHECK(block_structure({1, -1, 2, -2, 3}).sizes == std::vector<int>{1, 1, 1, 1, 1});
    const auto bs = block_structure({1, -1, 2, 2, -2, -2});
    REQUIRE(bs.blocks.size() == 4);
    CHECK(bs.blocks[2].members == std::vector<int>{3, 4});
    CHECK(distinct_labels({1, -1, 2, 3, -3}) == 5);
  }

  TEST_CASE("oracle examples") {
    CHECK(min_blocks_oracle({{1, 2}}, {}, 2).groups == 2);
    CHECK(min_blocks_oracle(parse_R1(six()), {}, 6).groups == 4);
    CHECK(min_blocks_oracle(parse_R1(fig3()), kFig3Touch, 11).groups == 2);
    CHECK(min_blocks_oracle(parse_R1(fig2()), kFig2Touch, 11).groups == 4);
    CHECK(min_blocks_oracle(parse_R1(five()), {}, 5).groups == 5);

    const auto infeasible = min_blocks_oracle({{1, 2}}, {{1, 2}}, 2);
    CHECK_FALSE(infeasible.feasible);
    REQUIRE(infeasible.witness);
    CHECK(*infeasible.witness == CurvePair{1, 2});
  }

  TEST_CASE("heuristic equals the oracle on the four reference instances") {
    const auto count = [](const R1Matrix& r1, int n, const TouchList& t) {
      return distinct_labels(almost_touch(infer_labels(r1, n), t, r1));
    };
    CHECK(count(fig2(), 11, kFig2Touch) == min_blocks_oracle(parse_R1(fig2()), kFig2Touch, 11).groups);
    CHECK(count(fig3(), 11, kFig3Touch) == min_blocks_oracle(parse_R1(fig3()), kFig3Touch, 11).groups);
    CHECK(count(six(), 6, {}) == min_blocks_oracle(parse_R1(six()), {}, 6).groups);
    CHECK(count(five(), 5, {}) == min_blocks_oracle(parse_R1(five()), {}, 5).groups);
  }

  TEST_CASE("property: the oracle agrees with exhaustive partition search") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 150; ++trial) {
      const auto c = support::random_constraint_set(rng);
      CAPTURE(trial);
      const auto got = min_blocks_oracle(c.crossings, c.touch, c.n);
      REQUIRE(got.feasible);
      CHECK(got.groups == support::brute_force_groups(c.crossings, c.touch, c.n));
      CHECK(crossing_violations(got.partition, c.crossings) == 0);
      for (const auto& [a, b] : c.touch)
        CHECK(got.partition[static_cast<std::size_t>(a - 1)] == got.partition[static_cast<std::size_t>(b - 1)]);
    }
  }

  TEST_CASE("property: heuristic is sound and never beats the oracle") {
    std::mt19937_64 rng(2024);
    int dropped = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const auto c = support::random_constraint_set(rng);
      CAPTURE(trial);
      const auto r1 = r1_of(c.crossings, c.n);
      const auto ve = infer_labels(r1, c.n);
      for (int v : ve) CHECK(v != 0);
      CHECK(crossing_violations(ve, c.crossings) == 0);

      TouchList kept;
      const auto refined = touch_with_retry(ve, c.touch, r1, &dropped, &kept);
      CHECK(crossing_violations(refined, c.crossings) == 0);
      for (const auto& [a, b] : kept)
        CHECK(refined[static_cast<std::size_t>(a - 1)] == refined[static_cast<std::size_t>(b - 1)]);
      CHECK(distinct_labels(refined) >= min_blocks_oracle(c.crossings, kept, c.n).groups);

      // Applying the accepted rows again changes nothing.
      CHECK(almost_touch(refined, kept, r1) == refined);
    }
    MESSAGE("Touch rows dropped after TouchError: " << dropped);
  }

  TEST_CASE("property: relabeling curves permutes the groups consistently") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const auto c = support::random_constraint_set(rng);
      std::vector<int> perm(static_cast<std::size_t>(c.n));
      std::iota(perm.begin(), perm.end(), 1);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::set<CurvePair> moved;
      for (const auto& [a, b] : c.crossings) {
        const int x = perm[static_cast<std::size_t>(a - 1)], y = perm[static_cast<std::size_t>(b - 1)];
        moved.insert({std::min(x, y), std::max(x, y)});
      }
      // The exact group count is permutation invariant.
      CHECK(min_blocks_oracle(moved, {}, c.n).groups == min_blocks_oracle(c.crossings, {}, c.n).groups);
      // The heuristic stays sound under any ordering.
      const auto ve = infer_labels(r1_of(moved, c.n), c.n);
      CHECK(crossing_violations(ve, moved) == 0);
      int total = 0;
      for (int s : block_structure(ve).sizes) total += s;
      CHECK(total == c.n);
    }
  }
}
