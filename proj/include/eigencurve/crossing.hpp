#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "eigencurve/tracker.hpp"

namespace eigencurve {

using CurvePair = std::pair<int, int>;  // 1-based, first < second

struct Crossing {
  int i = 0;
  int j = 0;
  double t_star = 0.0;
  double gap_before = 0.0;
  double gap_after = 0.0;

  friend bool operator==(const Crossing&, const Crossing&) = default;
};

struct CrossingSet {
  std::vector<Crossing> crossings;  // sorted by (i, j, t_star)

  std::set<CurvePair> pairs() const;
  friend bool operator==(const CrossingSet&, const CrossingSet&) = default;
};

/// (n-1) x (n+1) integer table: row i is [i, partners j > i ascending, 0 ...].
struct R1Matrix {
  int n = 0;
  std::vector<std::vector<int>> rows;

  friend bool operator==(const R1Matrix&, const R1Matrix&) = default;
};

struct NearApproach {
  int i = 0;
  int j = 0;
  double d_min = 0.0;
  double t_min = 0.0;
  /// Smallest of {1, 1e-2, 1e-4, 1e-6} that is >= d_min; empty when d_min > 1.
  std::optional<double> bucket;

  friend bool operator==(const NearApproach&, const NearApproach&) = default;
};

struct NearApproachTable {
  std::vector<NearApproach> entries;  // one per unordered pair, i < j

  /// Entry with the smallest d_min; throws InvalidArgument if empty.
  const NearApproach& closest() const;
  friend bool operator==(const NearApproachTable&, const NearApproachTable&) = default;
};

struct TouchCandidate {
  int i = 0;
  int j = 0;
  double t_min = 0.0;
  double d_min = 0.0;
  double score = 0.0;  // slope-exchange score in [0, 1]

  friend bool operator==(const TouchCandidate&, const TouchCandidate&) = default;
};

constexpr double kDefaultCrossTol = 1e-9;
constexpr double kRealTraceTol = 1e-9;

const std::vector<double>& near_approach_thresholds();
std::optional<double> bucket_for(double d_min);

/// One crossing per sign change of Re(lambda_i - lambda_j) between samples whose
/// gap exceeds cross_tol; t_star by linear interpolation. Throws InvalidArgument
/// for complex traces (use near_approach) or mismatched grids.
CrossingSet detect_crossings(const TraceSet& traces, double cross_tol = kDefaultCrossTol);

R1Matrix build_R1(const CrossingSet& crossings, int n);

/// Throws FormatError unless r1 satisfies the layout invariants.
void validate_R1(const R1Matrix& r1);

/// Crossing pairs encoded by r1 (validated).
std::set<CurvePair> parse_R1(const R1Matrix& r1);

/// Builds an R1 table from explicit rows {i: partners}.
R1Matrix make_R1(int n, const std::vector<std::pair<int, std::vector<int>>>& rows);

/// Grid minimum of |lambda_i - lambda_j| per pair, refined by fitting a parabola
/// to the complex difference through the three samples around the minimum.
NearApproachTable near_approach(const TraceSet& traces);

struct TouchOptions {
  double gap_threshold = 0.3;
  int angle_window = 50;   // samples per slope window
  double min_score = 0.5;  // slope-exchange acceptance level
};

/// Heuristic avoided-crossing candidates: local minima of the pair distance at
/// most gap_threshold without a sign change nearby whose incoming and outgoing
/// slopes are exchanged between the two curves. Advisory only.
std::vector<TouchCandidate> suggest_touch(const TraceSet& traces, const TouchOptions& options = {});

struct PairMinimum {
  double t = 0.0;
  double distance = 0.0;
  Complex first;
  Complex second;
};

/// Minimizes the smallest pairwise eigenvalue distance of flow(t) over [lo, hi]
/// by golden-section search on static eigensolves.
PairMinimum minimize_eigen_gap(const MatrixFlow& flow, double lo, double hi, double t_tol = 1e-15);

}  // namespace eigencurve
