#include "eigencurve/decomposition.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "eigencurve/errors.hpp"

namespace eigencurve {

namespace {

constexpr int kOracleMaxN = 12;

std::vector<std::vector<int>> partner_lists(const R1Matrix& r1) {
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(r1.n + 1));
  for (const auto& row : r1.rows)
    for (std::size_t c = 1; c < row.size() && row[c] != 0; ++c) rows[static_cast<std::size_t>(row[0])].push_back(row[c]);
  return rows;
}

}  // namespace

LabelVector infer_labels(const R1Matrix& r1, int n) {
  if (n < 1) throw InvalidArgument("infer_labels: n must be positive");
  if (r1.n != n) {
    std::ostringstream os;
    os << "infer_labels: R1 is for n=" << r1.n << " but n=" << n;
    throw InvalidArgument(os.str());
  }
  validate_R1(r1);
  const auto rows = partner_lists(r1);

  // 1-based; stamp[c] orders label assignments in time (0 = unlabeled).
  std::vector<int> ve(static_cast<std::size_t>(n + 1), 0);
  std::vector<long> stamp(static_cast<std::size_t>(n + 1), 0);
  long clock = 0;
  int used = 0;
  auto set_label = [&](int c, int label) {
    ve[static_cast<std::size_t>(c)] = label;
    stamp[static_cast<std::size_t>(c)] = label == 0 ? 0 : ++clock;
  };
  auto new_group = [&] { return ++used; };

  set_label(1, new_group());
  for (int i = 1; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    auto& vi = ve[static_cast<std::size_t>(i)];
    if (vi == 0) {
      const auto labeled = std::find_if(row.begin(), row.end(), [&](int j) { return ve[static_cast<std::size_t>(j)] != 0; });
      set_label(i, labeled != row.end() ? -ve[static_cast<std::size_t>(*labeled)] : new_group());
    }
    for (int j : row) {
      if (ve[static_cast<std::size_t>(j)] == 0) {
        set_label(j, -vi);
      } else if (ve[static_cast<std::size_t>(j)] == vi) {
        const long cut = stamp[static_cast<std::size_t>(j)];
        set_label(j, new_group());
        const long now = stamp[static_cast<std::size_t>(j)];
        for (int c = i + 1; c <= n; ++c) {
          const auto s = stamp[static_cast<std::size_t>(c)];
          if (c != j && s > cut && s < now) set_label(c, 0);
        }
        break;
      }
    }
  }
  if (ve[static_cast<std::size_t>(n)] == 0) set_label(n, new_group());

  // Repair pass: the rules above separate every crossing they visit, but a
  // cleared and re-derived label can meet an earlier partner again.
  for (int i = 1; i <= n; ++i)
    if (ve[static_cast<std::size_t>(i)] == 0) set_label(i, new_group());
  for (int i = 1; i < n; ++i)
    for (int j : rows[static_cast<std::size_t>(i)])
      if (ve[static_cast<std::size_t>(j)] == ve[static_cast<std::size_t>(i)]) set_label(j, new_group());

  return LabelVector(ve.begin() + 1, ve.end());
}

void validate_touch(const TouchList& touch, int n) {
  std::set<CurvePair> seen;
  for (std::size_t r = 0; r < touch.size(); ++r) {
    const auto [a, b] = touch[r];
    std::ostringstream os;
    os << "Touch row " << r + 1 << " (" << a << "," << b << "): ";
    if (a < 1 || b < 1 || a > n || b > n) throw InvalidArgument(os.str() + "curve index outside 1.." + std::to_string(n));
    if (a >= b) throw InvalidArgument(os.str() + "pairs must be increasing (a < b)");
    if (!seen.insert(touch[r]).second) throw InvalidArgument(os.str() + "duplicate row");
  }
}

LabelVector almost_touch(const LabelVector& ve, const TouchList& touch, const R1Matrix& r1) {
  const int n = static_cast<int>(ve.size());
  if (std::find(ve.begin(), ve.end(), 0) != ve.end()) throw InvalidArgument("almost_touch: label vector is incomplete");
  if (r1.n != n) throw InvalidArgument("almost_touch: R1 dimension does not match the label vector");
  validate_touch(touch, n);
  const auto crossings = parse_R1(r1);

  LabelVector out = ve;
  for (std::size_t r = 0; r < touch.size(); ++r) {
    const int row = static_cast<int>(r) + 1;
    const auto [a, b] = touch[r];
    const int x = out[static_cast<std::size_t>(a - 1)];
    const int y = out[static_cast<std::size_t>(b - 1)];
    if (x == y) continue;
    if (x == -y) {
      std::ostringstream os;
      os << "Touch row " << row << " (" << a << "," << b << ") joins opposite labels " << x << " and " << y
         << ": the curves belong to mutually crossing groups";
      throw TouchError(row, os.str());
    }
    for (int& v : out) {
      if (v == y)
        v = x;
      else if (v == -y)
        v = -x;
    }
    for (const auto& [i, j] : crossings) {
      if (out[static_cast<std::size_t>(i - 1)] == out[static_cast<std::size_t>(j - 1)]) {
        std::ostringstream os;
        os << "Touch row " << row << " (" << a << "," << b << ") merges crossing curves " << i << " and " << j
           << " into group " << out[static_cast<std::size_t>(i - 1)];
        throw TouchError(row, os.str());
      }
    }
  }
  return out;
}

BlockStructure block_structure(const LabelVector& ve) {
  if (std::find(ve.begin(), ve.end(), 0) != ve.end()) throw InvalidArgument("block_structure: label vector is incomplete");
  BlockStructure bs;
  std::map<int, std::size_t> index;
  for (std::size_t c = 0; c < ve.size(); ++c) {
    auto [it, inserted] = index.emplace(ve[c], bs.blocks.size());
    if (inserted) bs.blocks.push_back({ve[c], {}});
    bs.blocks[it->second].members.push_back(static_cast<int>(c) + 1);
  }
  for (const auto& b : bs.blocks) bs.sizes.push_back(static_cast<int>(b.members.size()));
  std::sort(bs.sizes.begin(), bs.sizes.end());
  return bs;
}

int distinct_labels(const LabelVector& ve) { return static_cast<int>(std::set<int>(ve.begin(), ve.end()).size()); }

int crossing_violations(const LabelVector& ve, const std::set<CurvePair>& crossings) {
  int count = 0;
  for (const auto& [i, j] : crossings)
    if (ve.at(static_cast<std::size_t>(i - 1)) == ve.at(static_cast<std::size_t>(j - 1))) ++count;
  return count;
}

OracleResult min_blocks_oracle(const std::set<CurvePair>& crossings, const TouchList& touch, int n) {
  if (n < 1 || n > kOracleMaxN) throw InvalidArgument("min_blocks_oracle: requires 1 <= n <= 12");
  for (const auto& [i, j] : crossings)
    if (i < 1 || j < 1 || i > n || j > n || i == j) throw InvalidArgument("min_blocks_oracle: crossing index out of range");
  for (const auto& [a, b] : touch)
    if (a < 1 || b < 1 || a > n || b > n) throw InvalidArgument("min_blocks_oracle: touch index out of range");

  // Contract touch pairs.
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]);
  };
  for (const auto& [a, b] : touch) parent[static_cast<std::size_t>(find(a - 1))] = find(b - 1);

  OracleResult out;
  std::vector<int> node(static_cast<std::size_t>(n));
  std::map<int, int> node_id;
  for (int c = 0; c < n; ++c) {
    const auto [it, _] = node_id.emplace(find(c), static_cast<int>(node_id.size()));
    node[static_cast<std::size_t>(c)] = it->second;
  }
  const int m = static_cast<int>(node_id.size());
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(m), std::vector<char>(static_cast<std::size_t>(m), 0));
  for (const auto& [i, j] : crossings) {
    const int u = node[static_cast<std::size_t>(i - 1)], v = node[static_cast<std::size_t>(j - 1)];
    if (u == v) {
      out.witness = CurvePair{std::min(i, j), std::max(i, j)};
      return out;
    }
    adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
  }

  // Components of the contracted crossing graph.
  std::vector<int> component(static_cast<std::size_t>(m), -1);
  std::vector<std::vector<int>> components;
  for (int s = 0; s < m; ++s) {
    if (component[static_cast<std::size_t>(s)] >= 0) continue;
    components.emplace_back();
    std::vector<int> stack{s};
    component[static_cast<std::size_t>(s)] = static_cast<int>(components.size()) - 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      components.back().push_back(u);
      for (int v = 0; v < m; ++v)
        if (adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] && component[static_cast<std::size_t>(v)] < 0) {
          component[static_cast<std::size_t>(v)] = component[static_cast<std::size_t>(s)];
          stack.push_back(v);
        }
    }
  }

  std::vector<int> color(static_cast<std::size_t>(m), 0);
  int offset = 0;
  for (auto& comp : components) {
    std::sort(comp.begin(), comp.end());
    // Smallest k admitting a proper coloring, by backtracking.
    std::function<bool(std::size_t, int)> colorable = [&](std::size_t idx, int k) -> bool {
      if (idx == comp.size()) return true;
      const int u = comp[idx];
      int used_max = 0;
      for (std::size_t p = 0; p < idx; ++p) used_max = std::max(used_max, color[static_cast<std::size_t>(comp[p])] - offset);
      // Symmetry breaking: a new color is only ever the next unused one.
      for (int c = 1; c <= std::min(k, used_max + 1); ++c) {
        bool ok = true;
        for (std::size_t p = 0; p < idx && ok; ++p)
          if (adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(comp[p])] && color[static_cast<std::size_t>(comp[p])] == offset + c) ok = false;
        if (!ok) continue;
        color[static_cast<std::size_t>(u)] = offset + c;
        if (colorable(idx + 1, k)) return true;
      }
      color[static_cast<std::size_t>(u)] = 0;
      return false;
    };
    int k = 1;
    while (!colorable(0, k)) ++k;
    offset += k;
  }

  out.feasible = true;
  out.groups = offset;
  out.partition.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) out.partition[static_cast<std::size_t>(c)] = color[static_cast<std::size_t>(node[static_cast<std::size_t>(c)])];
  return out;
}

}  // namespace eigencurve
