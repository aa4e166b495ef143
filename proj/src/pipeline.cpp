#include "eigencurve/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "eigencurve/errors.hpp"

namespace eigencurve {

using nlohmann::json;

namespace {

bool traces_are_real(const TraceSet& traces) {
  for (const auto& tr : traces)
    for (const auto& v : tr.values)
      if (std::abs(v.imag()) > kRealTraceTol) return false;
  return true;
}

// Linear interpolation of curve c at time t on the shared grid.
Complex value_at(const TraceSet& traces, int c, double t) {
  const auto& tr = traces[static_cast<std::size_t>(c - 1)];
  const auto it = std::upper_bound(tr.times.begin(), tr.times.end(), t);
  if (it == tr.times.begin()) return tr.values.front();
  if (it == tr.times.end()) return tr.values.back();
  const auto k = static_cast<std::size_t>(it - tr.times.begin());
  const double w = (t - tr.times[k - 1]) / (tr.times[k] - tr.times[k - 1]);
  return (1.0 - w) * tr.values[k - 1] + w * tr.values[k];
}

}  // namespace

Session make_session(const FlowRef& flow, double t0, double tf, const ZNNConfig& cfg, Provenance tracker) {
  if (!std::isfinite(t0) || !std::isfinite(tf)) throw DomainError("session interval must be finite");
  if (!(t0 < tf)) throw InvalidArgument("session interval requires t0 < tf");
  make_flow(flow);  // rejects unknown names and bad parameters early
  Session s;
  s.flow = flow;
  s.t0 = t0;
  s.tf = tf;
  s.cfg = cfg;
  s.tracker = tracker;
  return s;
}

void run_trace(Session& s, const ProgressFn& progress) {
  const MatrixFlow flow = make_flow(s.flow);
  TraceSet traces;
  std::vector<std::string> notices;
  if (s.tracker == Provenance::Znn) {
    TraceDiagnostics diag;
    traces = trace(flow, s.t0, s.tf, s.cfg, &diag, progress);
    notices = diag.notices;
  } else {
    traces = oracle_trace(flow, s.t0, s.tf, s.cfg.tau, s.cfg.store_vectors, progress);
  }
  s.traces = std::move(traces);
  s.notices = std::move(notices);
  s.crossings.reset();
  s.r1.reset();
  s.rc.reset();
  s.ve.reset();
  s.blocks.reset();
}

void run_analyze(Session& s) {
  if (s.traces.empty()) throw InvalidArgument("analyze: session has no traces; run trace first");
  s.rc = near_approach(s.traces);
  if (traces_are_real(s.traces)) {
    s.crossings = detect_crossings(s.traces);
    s.r1 = build_R1(*s.crossings, s.dimension());
  } else {
    s.crossings.reset();
    s.r1.reset();
  }
}

std::vector<std::string> run_infer(Session& s) {
  if (!s.r1) {
    throw InvalidArgument(s.rc ? "infer: crossing data exists only for real (hermitean) traces; this session has "
                                 "near-approach data only"
                               : "infer: session has no crossing data; run analyze first");
  }
  const int n = s.dimension();
  LabelVector ve = infer_labels(*s.r1, n);
  if (!s.touch.empty()) ve = almost_touch(ve, s.touch, *s.r1);
  std::vector<std::string> caveats;
  if (s.crossings->crossings.empty()) {
    caveats.push_back(
        "no eigencurve crossings on this interval: the labels only bound the block structure from above and do not "
        "certify decomposability; try a wider interval");
  }
  s.blocks = block_structure(ve);
  s.ve = std::move(ve);
  return caveats;
}

void run_touch(Session& s, const TouchList& touch) {
  if (!s.r1) throw InvalidArgument("touch: session has no crossing data; run analyze first");
  validate_touch(touch, s.dimension());
  Session next = s;
  next.touch = touch;
  run_infer(next);
  s = std::move(next);
}

std::vector<int> remap_curves(const TraceSet& old_traces, const TraceSet& fresh, double old_t0) {
  const int n = static_cast<int>(old_traces.size());
  if (static_cast<int>(fresh.size()) != n) throw InvalidArgument("remap_curves: curve counts differ");
  std::vector<int> out(static_cast<std::size_t>(n), 0);
  if (n == 0) return out;
  const auto& grid = fresh.front().times;
  const auto it = std::lower_bound(grid.begin(), grid.end(), old_t0);
  std::size_t k = static_cast<std::size_t>(it - grid.begin());
  if (k == grid.size() || (k > 0 && std::abs(grid[k - 1] - old_t0) < std::abs(grid[k] - old_t0))) k = k == 0 ? 0 : k - 1;

  Eigen::MatrixXd cost(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      cost(a, b) = std::abs(old_traces[static_cast<std::size_t>(a)].values.front() - fresh[static_cast<std::size_t>(b)].values[k]);
  const auto match = min_cost_assignment(cost);
  for (int a = 0; a < n; ++a) {
    const Complex va = old_traces[static_cast<std::size_t>(a)].values.front();
    const double tol = 1e-5 * std::max(1.0, std::abs(va));
    bool ambiguous = cost(a, match[static_cast<std::size_t>(a)]) > tol;
    for (int b = 0; b < n && !ambiguous; ++b)
      if (b != a && std::abs(old_traces[static_cast<std::size_t>(b)].values.front() - va) <= tol) ambiguous = true;
    if (!ambiguous) out[static_cast<std::size_t>(a)] = match[static_cast<std::size_t>(a)] + 1;
  }
  return out;
}

std::vector<std::string> extend_interval(Session& s, double new_t0, double new_tf, const ProgressFn& progress) {
  if (!std::isfinite(new_t0) || !std::isfinite(new_tf)) throw DomainError("extend: interval must be finite");
  if (new_t0 > s.t0 || new_tf < s.tf) {
    std::ostringstream os;
    os << "extend: [" << new_t0 << ", " << new_tf << "] does not contain the current interval [" << s.t0 << ", "
       << s.tf << "]";
    throw InvalidArgument(os.str());
  }
  Session next = s;
  HistoryEntry archived{s.t0, s.tf, s.ve, s.touch, {}};
  std::vector<std::string> notices;
  next.t0 = new_t0;
  next.tf = new_tf;

  if (!s.traces.empty()) {
    run_trace(next, progress);
    if (s.rc || s.r1) run_analyze(next);

    TouchList carried;
    if (!s.touch.empty()) {
      const auto map = remap_curves(s.traces, next.traces, s.t0);
      for (const auto& [a, b] : s.touch) {
        const int na = map[static_cast<std::size_t>(a - 1)], nb = map[static_cast<std::size_t>(b - 1)];
        std::ostringstream os;
        os << "Touch row (" << a << "," << b << ")";
        if (na == 0 || nb == 0) {
          notices.push_back(os.str() + " dropped: curve identity at the old t0 is ambiguous");
          continue;
        }
        const CurvePair moved{std::min(na, nb), std::max(na, nb)};
        if (std::find(carried.begin(), carried.end(), moved) != carried.end()) continue;
        if (moved != CurvePair{a, b}) {
          os << " remapped to (" << moved.first << "," << moved.second << ")";
          notices.push_back(os.str());
        }
        carried.push_back(moved);
      }
    }
    next.touch = carried;
    if (s.ve && next.r1) {
      for (;;) {
        try {
          run_infer(next);
          break;
        } catch (const TouchError& e) {
          const auto row = static_cast<std::size_t>(e.row() - 1);
          std::ostringstream os;
          os << "Touch row (" << next.touch[row].first << "," << next.touch[row].second
             << ") dropped on the new interval: " << e.what();
          notices.push_back(os.str());
          next.touch.erase(next.touch.begin() + static_cast<std::ptrdiff_t>(row));
        }
      }
    }
  }
  archived.notices = notices;
  next.history.push_back(std::move(archived));
  s = std::move(next);
  return notices;
}

std::string plot_data_json(const Session& s, int indent) {
  json doc;
  doc["flow"] = s.flow.name;
  doc["interval"] = {s.t0, s.tf};
  doc["real"] = traces_are_real(s.traces);
  json curves = json::array();
  for (const auto& tr : s.traces) {
    json re = json::array(), im = json::array();
    for (const auto& v : tr.values) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    curves.push_back({{"index", tr.curve_index},
                      {"t", tr.times},
                      {"re", std::move(re)},
                      {"im", std::move(im)},
                      {"restarts", tr.restarts},
                      {"degenerate", tr.degenerate}});
  }
  doc["curves"] = std::move(curves);
  json crossings = json::array();
  if (s.crossings) {
    for (const auto& c : s.crossings->crossings) {
      const Complex v = value_at(s.traces, c.i, c.t_star);
      crossings.push_back({{"i", c.i}, {"j", c.j}, {"t", c.t_star}, {"re", v.real()}, {"im", v.imag()}});
    }
  }
  doc["crossings"] = std::move(crossings);
  json near = json::array();
  if (s.rc) {
    for (const auto& e : s.rc->entries) {
      if (!e.bucket || *e.bucket > 1e-2) continue;
      const Complex a = value_at(s.traces, e.i, e.t_min), b = value_at(s.traces, e.j, e.t_min);
      near.push_back({{"i", e.i},
                      {"j", e.j},
                      {"t", e.t_min},
                      {"d_min", e.d_min},
                      {"bucket", *e.bucket},
                      {"re", {a.real(), b.real()}},
                      {"im", {a.imag(), b.imag()}}});
    }
  }
  doc["near_approaches"] = std::move(near);
  doc["ve"] = s.ve ? json(*s.ve) : json(nullptr);
  doc["block_sizes"] = s.blocks ? json(s.blocks->sizes) : json(nullptr);
  json touch = json::array();
  for (const auto& [a, b] : s.touch) touch.push_back({a, b});
  doc["touch"] = std::move(touch);
  json history = json::array();
  for (const auto& h : s.history) history.push_back({{"interval", {h.t0, h.tf}}, {"ve", h.ve ? json(*h.ve) : json(nullptr)}});
  doc["history"] = std::move(history);
  return doc.dump(indent);
}

std::string suggestions_json(const Session& s, const TouchOptions& options, int indent) {
  json out = json::array();
  for (const auto& c : suggest_touch(s.traces, options))
    out.push_back({{"i", c.i}, {"j", c.j}, {"t", c.t_min}, {"d_min", c.d_min}, {"score", c.score}});
  return json{{"advisory", true}, {"candidates", std::move(out)}}.dump(indent);
}

}  // namespace eigencurve
