#pragma once

#include <optional>
#include <set>
#include <vector>

#include "eigencurve/crossing.hpp"

namespace eigencurve {

/// Signed group labels, one per curve (index 0 is curve 1). Opposite labels +k
/// and -k are distinct groups of the same family.
using LabelVector = std::vector<int>;
using TouchList = std::vector<CurvePair>;

struct Block {
  int label = 0;
  std::vector<int> members;  // 1-based curve indices, ascending

  friend bool operator==(const Block&, const Block&) = default;
};

struct BlockStructure {
  std::vector<Block> blocks;  // ordered by first member
  std::vector<int> sizes;     // ascending

  friend bool operator==(const BlockStructure&, const BlockStructure&) = default;
};

/// Labels curves from the crossing table:
///   - curve 1 opens group 1; rows are processed in order;
///   - an unlabeled row curve takes the opposite of its first labeled partner,
///     otherwise it opens the next unused group;
///   - unlabeled partners take the opposite of the row curve's label;
///   - a partner already carrying the row curve's label (a clash) moves to a new
///     group, labels handed out since that partner was labeled are cleared for
///     later curves, and the rest of the row is skipped.
/// A final pass moves any curve still sharing a label with a crossing partner
/// to a new group, so the result always separates crossing pairs.
LabelVector infer_labels(const R1Matrix& r1, int n);

/// Throws InvalidArgument for out-of-range indices, a >= b, or duplicate rows.
void validate_touch(const TouchList& touch, int n);

/// Applies Touch rows in order, renaming b's group (and its opposite) to a's.
/// Throws TouchError naming the 1-based row when a row joins opposite labels or
/// its merge puts two crossing curves into one group.
LabelVector almost_touch(const LabelVector& ve, const TouchList& touch, const R1Matrix& r1);

/// Throws InvalidArgument if ve contains zeros.
BlockStructure block_structure(const LabelVector& ve);

int distinct_labels(const LabelVector& ve);

/// Crossing pairs whose curves share a label.
int crossing_violations(const LabelVector& ve, const std::set<CurvePair>& crossings);

struct OracleResult {
  bool feasible = false;
  int groups = 0;
  std::vector<int> partition;        // group id (1-based) per curve; empty if infeasible
  std::optional<CurvePair> witness;  // a crossing pair united by touches
};

/// Exact minimum number of groups: touch pairs are contracted first, then each
/// connected component of the crossing graph is colored with the fewest colors
/// by exhaustive backtracking, and component counts are summed (curves in
/// different components never share a group, as with the labeling above).
/// Requires n <= 12.
OracleResult min_blocks_oracle(const std::set<CurvePair>& crossings, const TouchList& touch, int n);

}  // namespace eigencurve
