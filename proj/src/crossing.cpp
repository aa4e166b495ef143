#include "eigencurve/crossing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "eigencurve/errors.hpp"

namespace eigencurve {

namespace {

void require_common_grid(const TraceSet& traces, const char* who) {
  if (traces.empty()) return;
  const auto& grid = traces.front().times;
  for (const auto& tr : traces) {
    if (tr.times != grid || tr.values.size() != grid.size())
      throw InvalidArgument(std::string(who) + ": traces do not share a common grid");
  }
}

bool is_real(const TraceSet& traces) {
  for (const auto& tr : traces)
    for (const auto& v : tr.values)
      if (std::abs(v.imag()) > kRealTraceTol) return false;
  return true;
}

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

// Minimizes |P(s)| on [-1, 1] for the parabola through (-1, dm), (0, d0), (1, dp).
std::pair<double, double> parabola_minimum(Complex dm, Complex d0, Complex dp) {
  const Complex b = (dp - dm) / 2.0;
  const Complex c = (dp - 2.0 * d0 + dm) / 2.0;
  auto f = [&](double s) { return std::abs(d0 + s * (b + s * c)); };
  constexpr int kSamples = 400;
  double best_s = 0.0;
  double best = f(0.0);
  for (int k = 0; k <= kSamples; ++k) {
    const double s = -1.0 + 2.0 * k / kSamples;
    const double v = f(s);
    if (v < best) {
      best = v;
      best_s = s;
    }
  }
  double lo = std::max(-1.0, best_s - 2.0 / kSamples);
  double hi = std::min(1.0, best_s + 2.0 / kSamples);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  const double s = (lo + hi) / 2.0;
  const double v = f(s);
  return v < best ? std::pair{s, v} : std::pair{best_s, best};
}

std::vector<Complex> difference(const TraceSet& traces, int i, int j) {
  const auto& a = traces[static_cast<std::size_t>(i)].values;
  const auto& b = traces[static_cast<std::size_t>(j)].values;
  std::vector<Complex> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return d;
}

double min_pair_distance(const std::vector<Complex>& values, Complex* first, Complex* second) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < values.size(); ++p)
    for (std::size_t q = p + 1; q < values.size(); ++q) {
      const double d = std::abs(values[p] - values[q]);
      if (d < best) {
        best = d;
        if (first) *first = values[p];
        if (second) *second = values[q];
      }
    }
  return best;
}

}  // namespace

std::set<CurvePair> CrossingSet::pairs() const {
  std::set<CurvePair> out;
  for (const auto& c : crossings) out.emplace(c.i, c.j);
  return out;
}

const NearApproach& NearApproachTable::closest() const {
  if (entries.empty()) throw InvalidArgument("near-approach table is empty");
  return *std::min_element(entries.begin(), entries.end(),
                           [](const NearApproach& a, const NearApproach& b) { return a.d_min < b.d_min; });
}

const std::vector<double>& near_approach_thresholds() {
  static const std::vector<double> thresholds{1.0, 1e-2, 1e-4, 1e-6};
  return thresholds;
}

std::optional<double> bucket_for(double d_min) {
  std::optional<double> bucket;
  for (double th : near_approach_thresholds())
    if (d_min <= th) bucket = th;
  return bucket;
}

CrossingSet detect_crossings(const TraceSet& traces, double cross_tol) {
  require_common_grid(traces, "detect_crossings");
  if (!is_real(traces))
    throw InvalidArgument("detect_crossings: traces are complex-valued; use near_approach for general flows");
  if (!(cross_tol >= 0.0)) throw InvalidArgument("detect_crossings: cross_tol must be non-negative");
  CrossingSet out;
  const int n = static_cast<int>(traces.size());
  if (n == 0) return out;
  const auto& t = traces.front().times;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto d = difference(traces, i, j);
      // Compare consecutive samples whose gap is resolvable; contacts within
      // cross_tol are skipped over rather than counted.
      std::ptrdiff_t prev = -1;
      for (std::size_t k = 0; k < d.size(); ++k) {
        const double dk = d[k].real();
        if (std::abs(dk) <= cross_tol) continue;
        if (prev >= 0) {
          const double dp = d[static_cast<std::size_t>(prev)].real();
          if (sign_of(dp) != sign_of(dk)) {
            const double tp = t[static_cast<std::size_t>(prev)];
            const double t_star = tp + (t[k] - tp) * dp / (dp - dk);
            out.crossings.push_back({i + 1, j + 1, t_star, std::abs(dp), std::abs(dk)});
          }
        }
        prev = static_cast<std::ptrdiff_t>(k);
      }
    }
  }
  std::sort(out.crossings.begin(), out.crossings.end(), [](const Crossing& a, const Crossing& b) {
    return std::tie(a.i, a.j, a.t_star) < std::tie(b.i, b.j, b.t_star);
  });
  return out;
}

R1Matrix build_R1(const CrossingSet& crossings, int n) {
  if (n < 1) throw InvalidArgument("build_R1: n must be positive");
  R1Matrix r1;
  r1.n = n;
  std::vector<std::set<int>> partners(static_cast<std::size_t>(n));
  for (const auto& c : crossings.crossings) {
    const int lo = std::min(c.i, c.j), hi = std::max(c.i, c.j);
    if (lo < 1 || hi > n || lo == hi) {
      std::ostringstream os;
      os << "build_R1: crossing (" << c.i << "," << c.j << ") outside 1.." << n;
      throw InvalidArgument(os.str());
    }
    partners[static_cast<std::size_t>(lo - 1)].insert(hi);
  }
  for (int i = 1; i < n; ++i) {
    std::vector<int> row(static_cast<std::size_t>(n + 1), 0);
    row[0] = i;
    std::size_t col = 1;
    for (int j : partners[static_cast<std::size_t>(i - 1)]) row[col++] = j;
    r1.rows.push_back(std::move(row));
  }
  return r1;
}

void validate_R1(const R1Matrix& r1) {
  const int n = r1.n;
  auto fail = [&](int row, const std::string& what) {
    std::ostringstream os;
    os << "R1 row " << row << ": " << what;
    throw FormatError(os.str());
  };
  if (n < 1) throw FormatError("R1: dimension must be positive");
  if (static_cast<int>(r1.rows.size()) != n - 1) throw FormatError("R1: expected n-1 rows");
  for (int i = 1; i < n; ++i) {
    const auto& row = r1.rows[static_cast<std::size_t>(i - 1)];
    if (static_cast<int>(row.size()) != n + 1) fail(i, "expected n+1 columns");
    if (row[0] != i) fail(i, "first column must equal the row index");
    int prev = i;
    bool padding = false;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] == 0) {
        padding = true;
        continue;
      }
      if (padding) fail(i, "nonzero entry after zero padding");
      if (row[c] <= prev || row[c] > n) fail(i, "partners must be strictly increasing in (i, n]");
      prev = row[c];
    }
  }
}

std::set<CurvePair> parse_R1(const R1Matrix& r1) {
  validate_R1(r1);
  std::set<CurvePair> out;
  for (const auto& row : r1.rows)
    for (std::size_t c = 1; c < row.size() && row[c] != 0; ++c) out.emplace(row[0], row[c]);
  return out;
}

R1Matrix make_R1(int n, const std::vector<std::pair<int, std::vector<int>>>& rows) {
  CrossingSet cs;
  for (const auto& [i, partners] : rows)
    for (int j : partners) cs.crossings.push_back({i, j, 0.0, 0.0, 0.0});
  return build_R1(cs, n);
}

NearApproachTable near_approach(const TraceSet& traces) {
  require_common_grid(traces, "near_approach");
  NearApproachTable table;
  const int n = static_cast<int>(traces.size());
  if (n == 0) return table;
  const auto& t = traces.front().times;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto d = difference(traces, i, j);
      std::size_t k = 0;
      for (std::size_t m = 1; m < d.size(); ++m)
        if (std::abs(d[m]) < std::abs(d[k])) k = m;
      NearApproach e{i + 1, j + 1, std::abs(d[k]), t[k], {}};
      if (k > 0 && k + 1 < d.size()) {
        const auto [s, v] = parabola_minimum(d[k - 1], d[k], d[k + 1]);
        if (v < e.d_min) {
          e.d_min = v;
          e.t_min = s < 0.0 ? t[k] + s * (t[k] - t[k - 1]) : t[k] + s * (t[k + 1] - t[k]);
        }
      }
      e.bucket = bucket_for(e.d_min);
      table.entries.push_back(e);
    }
  }
  return table;
}

std::vector<TouchCandidate> suggest_touch(const TraceSet& traces, const TouchOptions& options) {
  require_common_grid(traces, "suggest_touch");
  if (options.angle_window < 1) throw InvalidArgument("suggest_touch: angle_window must be >= 1");
  std::vector<TouchCandidate> out;
  const int n = static_cast<int>(traces.size());
  if (n == 0) return out;
  const bool real = is_real(traces);
  const auto& t = traces.front().times;
  const auto last = static_cast<std::ptrdiff_t>(t.size()) - 1;
  constexpr std::ptrdiff_t kMinWindow = 3;

  for (int i = 0; i < n; ++i) {
    const auto& li = traces[static_cast<std::size_t>(i)].values;
    for (int j = i + 1; j < n; ++j) {
      const auto& lj = traces[static_cast<std::size_t>(j)].values;
      const auto d = difference(traces, i, j);
      std::vector<double> dist(d.size());
      for (std::size_t k = 0; k < d.size(); ++k) dist[k] = std::abs(d[k]);

      for (std::ptrdiff_t m = 1; m < last; ++m) {
        const double dm = dist[static_cast<std::size_t>(m)];
        if (dm > options.gap_threshold) continue;
        const std::ptrdiff_t w = std::min<std::ptrdiff_t>(options.angle_window, std::min(m, last - m) / 2);
        if (w < kMinWindow) continue;
        // Local minimum over [m - w, m + w], leftmost among equal values.
        bool is_min = true;
        for (std::ptrdiff_t k = m - w; k <= m + w && is_min; ++k) {
          const double dk = dist[static_cast<std::size_t>(k)];
          if (k < m ? dk <= dm : dk < dm) is_min = false;
        }
        if (!is_min) continue;

        bool sign_change = false;
        if (real) {
          int sign = 0;
          for (std::ptrdiff_t k = m - 2 * w; k <= m + 2 * w; ++k) {
            const double r = d[static_cast<std::size_t>(k)].real();
            if (std::abs(r) <= kDefaultCrossTol) continue;
            if (sign != 0 && sign_of(r) != sign) sign_change = true;
            sign = sign_of(r);
          }
        } else {
          sign_change = dm <= kDefaultCrossTol;
        }
        if (sign_change) continue;

        const double span = t[static_cast<std::size_t>(m - w)] - t[static_cast<std::size_t>(m - 2 * w)];
        auto slope = [&](const std::vector<Complex>& v, std::ptrdiff_t from) {
          return (v[static_cast<std::size_t>(from + w)] - v[static_cast<std::size_t>(from)]) / span;
        };
        const Complex si_in = slope(li, m - 2 * w), sj_in = slope(lj, m - 2 * w);
        const Complex si_out = slope(li, m + w), sj_out = slope(lj, m + w);
        const double exchange = std::max(std::abs(si_in - sj_out), std::abs(sj_in - si_out));
        const double continuation = std::max(std::abs(si_in - si_out), std::abs(sj_in - sj_out));
        const double score = continuation > 0.0 ? std::clamp(1.0 - exchange / continuation, 0.0, 1.0) : 0.0;
        if (score < options.min_score) continue;
        out.push_back({i + 1, j + 1, t[static_cast<std::size_t>(m)], dm, score});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const TouchCandidate& a, const TouchCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.d_min, a.i, a.j, a.t_min) < std::tie(b.d_min, b.i, b.j, b.t_min);
  });
  return out;
}

PairMinimum minimize_eigen_gap(const MatrixFlow& flow, double lo, double hi, double t_tol) {
  if (!(lo < hi)) throw InvalidArgument("minimize_eigen_gap: requires lo < hi");
  if (flow.dimension() < 2) throw InvalidArgument("minimize_eigen_gap: needs at least two eigenvalues");
  const bool hermitean = flow.is_hermitean();
  auto gap = [&](double t) { return min_pair_distance(static_eigenvalues(flow.evaluate(t), hermitean), nullptr, nullptr); };

  constexpr int kSamples = 64;
  double best_t = lo;
  double best = gap(lo);
  for (int k = 1; k <= kSamples; ++k) {
    const double tk = lo + (hi - lo) * k / kSamples;
    const double v = gap(tk);
    if (v < best) {
      best = v;
      best_t = tk;
    }
  }
  double a = std::max(lo, best_t - (hi - lo) / kSamples);
  double b = std::min(hi, best_t + (hi - lo) / kSamples);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = gap(x1), f2 = gap(x2);
  while (b - a > t_tol * std::max(1.0, std::abs(a))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = gap(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = gap(x2);
    }
    if (x1 >= x2) break;
  }
  for (double tc : {x1, x2, 0.5 * (a + b)}) {
    const double v = gap(tc);
    if (v < best) {
      best = v;
      best_t = tc;
    }
  }
  PairMinimum out;
  out.t = best_t;
  out.distance = min_pair_distance(static_eigenvalues(flow.evaluate(best_t), hermitean), &out.first, &out.second);
  return out;
}

}  // namespace eigencurve
