#include "eigencurve/session.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eigencurve/errors.hpp"

namespace eigencurve {

using nlohmann::json;

namespace {

json complex_array(const std::vector<Complex>& values, bool imag) {
  json out = json::array();
  for (const auto& v : values) out.push_back(imag ? v.imag() : v.real());
  return out;
}

json to_json(const TraceSet& traces) {
  json out = json::array();
  for (const auto& tr : traces) {
    json j{{"curve", tr.curve_index},
           {"provenance", to_string(tr.provenance)},
           {"times", tr.times},
           {"re", complex_array(tr.values, false)},
           {"im", complex_array(tr.values, true)},
           {"restarts", tr.restarts},
           {"degenerate", tr.degenerate}};
    if (!tr.vectors.empty()) {
      json vecs = json::array();
      for (const auto& v : tr.vectors) {
        json entries = json::array();
        for (Eigen::Index k = 0; k < v.size(); ++k) entries.push_back({v(k).real(), v(k).imag()});
        vecs.push_back(std::move(entries));
      }
      j["vectors"] = std::move(vecs);
    }
    out.push_back(std::move(j));
  }
  return out;
}

json to_json(const ZNNConfig& c) {
  return {{"tau", c.tau},
          {"eta", c.eta},
          {"formula", {c.order, c.past_points}},
          {"restart_threshold", c.restart_threshold},
          {"max_restarts_per_curve", c.max_restarts_per_curve},
          {"residual_tolerance", c.residual_tolerance},
          {"audit_interval", c.audit_interval},
          {"store_vectors", c.store_vectors}};
}

json pairs_json(const TouchList& pairs) {
  json out = json::array();
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

json optional_labels(const std::optional<LabelVector>& ve) { return ve ? json(*ve) : json(nullptr); }

// --- parsing helpers --------------------------------------------------------

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw FormatError("session " + where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<int>();
}

std::vector<double> as_doubles(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_double(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<int> as_ints(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  std::vector<int> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_int(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

TouchList as_pairs(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of pairs");
  TouchList out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto p = as_ints(v[k], where + "[" + std::to_string(k) + "]");
    if (p.size() != 2) fail(where, "pairs must have two entries");
    out.emplace_back(p[0], p[1]);
  }
  return out;
}

std::optional<LabelVector> as_optional_labels(const json& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  return as_ints(v, where);
}

TraceSet parse_traces(const json& v) {
  if (!v.is_array()) fail("traces", "expected an array");
  TraceSet out;
  for (std::size_t c = 0; c < v.size(); ++c) {
    const std::string where = "traces[" + std::to_string(c) + "]";
    const json& j = v[c];
    EigencurveTrace tr;
    tr.curve_index = as_int(field(j, "curve", where), where + ".curve");
    const auto& prov = field(j, "provenance", where);
    if (!prov.is_string()) fail(where + ".provenance", "expected a string");
    tr.provenance = provenance_from_string(prov.get<std::string>());
    tr.times = as_doubles(field(j, "times", where), where + ".times");
    const auto re = as_doubles(field(j, "re", where), where + ".re");
    const auto im = as_doubles(field(j, "im", where), where + ".im");
    if (re.size() != tr.times.size() || im.size() != tr.times.size()) fail(where, "times/re/im lengths differ");
    for (std::size_t k = 0; k < re.size(); ++k) tr.values.emplace_back(re[k], im[k]);
    tr.restarts = as_doubles(field(j, "restarts", where), where + ".restarts");
    const auto& deg = field(j, "degenerate", where);
    if (!deg.is_boolean()) fail(where + ".degenerate", "expected a boolean");
    tr.degenerate = deg.get<bool>();
    if (const auto it = j.find("vectors"); it != j.end()) {
      if (!it->is_array() || it->size() != tr.times.size()) fail(where + ".vectors", "expected one vector per sample");
      for (const auto& vec : *it) {
        if (!vec.is_array()) fail(where + ".vectors", "expected arrays");
        CVector x(static_cast<Eigen::Index>(vec.size()));
        for (std::size_t k = 0; k < vec.size(); ++k) {
          const auto parts = as_doubles(vec[k], where + ".vectors");
          if (parts.size() != 2) fail(where + ".vectors", "entries must be [re, im]");
          x(static_cast<Eigen::Index>(k)) = Complex(parts[0], parts[1]);
        }
        tr.vectors.push_back(std::move(x));
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

Session parse_session(const json& doc) {
  if (!doc.is_object()) fail("document", "expected a JSON object");
  const auto& version = field(doc, "version", "document");
  if (!version.is_string() || version.get<std::string>() != kSessionVersion)
    fail("document", "unsupported version " + version.dump() + " (expected \"" + kSessionVersion + "\")");

  Session s;
  const auto& flow = field(doc, "flow", "document");
  const auto& name = field(flow, "name", "flow");
  if (!name.is_string()) fail("flow.name", "expected a string");
  s.flow.name = name.get<std::string>();
  const auto& seed = field(flow, "seed", "flow");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    fail("flow.seed", "expected a non-negative integer");
  s.flow.seed = seed.get<std::uint64_t>();
  const auto& obscure = field(flow, "obscure", "flow");
  if (!obscure.is_boolean()) fail("flow.obscure", "expected a boolean");
  s.flow.obscure = obscure.get<bool>();
  const auto& params = field(flow, "params", "flow");
  if (!params.is_object()) fail("flow.params", "expected an object");
  for (const auto& [k, v] : params.items()) s.flow.params[k] = as_double(v, "flow.params." + k);

  const auto interval = as_doubles(field(doc, "interval", "document"), "interval");
  if (interval.size() != 2) fail("interval", "expected [t0, tf]");
  s.t0 = interval[0];
  s.tf = interval[1];

  const auto& cfg = field(doc, "config", "document");
  s.cfg.tau = as_double(field(cfg, "tau", "config"), "config.tau");
  s.cfg.eta = as_double(field(cfg, "eta", "config"), "config.eta");
  const auto formula = as_ints(field(cfg, "formula", "config"), "config.formula");
  if (formula.size() != 2) fail("config.formula", "expected [j, s]");
  s.cfg.order = formula[0];
  s.cfg.past_points = formula[1];
  s.cfg.restart_threshold = as_double(field(cfg, "restart_threshold", "config"), "config.restart_threshold");
  s.cfg.max_restarts_per_curve = as_int(field(cfg, "max_restarts_per_curve", "config"), "config.max_restarts_per_curve");
  s.cfg.residual_tolerance = as_double(field(cfg, "residual_tolerance", "config"), "config.residual_tolerance");
  s.cfg.audit_interval = as_int(field(cfg, "audit_interval", "config"), "config.audit_interval");
  const auto& store = field(cfg, "store_vectors", "config");
  if (!store.is_boolean()) fail("config.store_vectors", "expected a boolean");
  s.cfg.store_vectors = store.get<bool>();

  const auto& tracker = field(doc, "tracker", "document");
  if (!tracker.is_string()) fail("tracker", "expected a string");
  s.tracker = provenance_from_string(tracker.get<std::string>());

  s.traces = parse_traces(field(doc, "traces", "document"));

  if (const auto& c = field(doc, "crossings", "document"); !c.is_null()) {
    if (!c.is_array()) fail("crossings", "expected an array");
    CrossingSet cs;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const std::string where = "crossings[" + std::to_string(k) + "]";
      Crossing x;
      x.i = as_int(field(c[k], "i", where), where + ".i");
      x.j = as_int(field(c[k], "j", where), where + ".j");
      x.t_star = as_double(field(c[k], "t_star", where), where + ".t_star");
      x.gap_before = as_double(field(c[k], "gap_before", where), where + ".gap_before");
      x.gap_after = as_double(field(c[k], "gap_after", where), where + ".gap_after");
      cs.crossings.push_back(x);
    }
    s.crossings = std::move(cs);
  }
  if (const auto& r = field(doc, "r1", "document"); !r.is_null()) {
    R1Matrix r1;
    r1.n = as_int(field(r, "n", "r1"), "r1.n");
    const auto& rows = field(r, "rows", "r1");
    if (!rows.is_array()) fail("r1.rows", "expected an array");
    for (std::size_t k = 0; k < rows.size(); ++k) r1.rows.push_back(as_ints(rows[k], "r1.rows[" + std::to_string(k) + "]"));
    validate_R1(r1);
    s.r1 = std::move(r1);
  }
  if (const auto& rc = field(doc, "rc", "document"); !rc.is_null()) {
    if (!rc.is_array()) fail("rc", "expected an array");
    NearApproachTable table;
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const std::string where = "rc[" + std::to_string(k) + "]";
      NearApproach e;
      e.i = as_int(field(rc[k], "i", where), where + ".i");
      e.j = as_int(field(rc[k], "j", where), where + ".j");
      e.d_min = as_double(field(rc[k], "d_min", where), where + ".d_min");
      e.t_min = as_double(field(rc[k], "t_min", where), where + ".t_min");
      const auto& b = field(rc[k], "bucket", where);
      if (!b.is_null()) e.bucket = as_double(b, where + ".bucket");
      table.entries.push_back(e);
    }
    s.rc = std::move(table);
  }
  s.touch = as_pairs(field(doc, "touch", "document"), "touch");
  s.ve = as_optional_labels(field(doc, "ve", "document"), "ve");
  if (s.ve) s.blocks = block_structure(*s.ve);

  const auto& history = field(doc, "history", "document");
  if (!history.is_array()) fail("history", "expected an array");
  for (std::size_t k = 0; k < history.size(); ++k) {
    const std::string where = "history[" + std::to_string(k) + "]";
    HistoryEntry h;
    const auto iv = as_doubles(field(history[k], "interval", where), where + ".interval");
    if (iv.size() != 2) fail(where + ".interval", "expected [t0, tf]");
    h.t0 = iv[0];
    h.tf = iv[1];
    h.ve = as_optional_labels(field(history[k], "ve", where), where + ".ve");
    h.touch = as_pairs(field(history[k], "touch", where), where + ".touch");
    const auto& notes = field(history[k], "notices", where);
    if (!notes.is_array()) fail(where + ".notices", "expected an array");
    for (const auto& note : notes) {
      if (!note.is_string()) fail(where + ".notices", "expected strings");
      h.notices.push_back(note.get<std::string>());
    }
    s.history.push_back(std::move(h));
  }
  const auto& notices = field(doc, "notices", "document");
  if (!notices.is_array()) fail("notices", "expected an array");
  for (const auto& note : notices) {
    if (!note.is_string()) fail("notices", "expected strings");
    s.notices.push_back(note.get<std::string>());
  }
  return s;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_consistency(const Session& s) {
  const int n = s.dimension();
  for (const auto& tr : s.traces)
    if (tr.times != s.traces.front().times || tr.values.size() != tr.times.size())
      throw FormatError("session: traces do not share one sample grid");
  if (s.crossings && !s.r1) throw FormatError("session: crossings present without R1");
  if (s.r1) {
    if (!s.crossings) throw FormatError("session: R1 present without crossings");
    if (!(*s.r1 == build_R1(*s.crossings, n))) throw FormatError("session: R1 does not match the crossing set");
  }
  if (s.ve) {
    if (static_cast<int>(s.ve->size()) != n) throw FormatError("session: label vector length differs from curve count");
    if (!s.blocks || !(*s.blocks == block_structure(*s.ve))) throw FormatError("session: block structure does not match ve");
  } else if (s.blocks) {
    throw FormatError("session: block structure present without ve");
  }
  validate_touch(s.touch, std::max(n, 1));
}

std::string session_to_json(const Session& s, int indent) {
  check_consistency(s);
  json doc;
  doc["format"] = "eigencurve-session";
  doc["version"] = kSessionVersion;
  json params = json::object();
  for (const auto& [k, v] : s.flow.params) params[k] = v;
  doc["flow"] = {{"name", s.flow.name}, {"seed", s.flow.seed}, {"obscure", s.flow.obscure}, {"params", params}};
  doc["interval"] = {s.t0, s.tf};
  doc["config"] = to_json(s.cfg);
  doc["tracker"] = to_string(s.tracker);
  doc["traces"] = to_json(s.traces);
  if (s.crossings) {
    json cs = json::array();
    for (const auto& c : s.crossings->crossings)
      cs.push_back({{"i", c.i}, {"j", c.j}, {"t_star", c.t_star}, {"gap_before", c.gap_before}, {"gap_after", c.gap_after}});
    doc["crossings"] = std::move(cs);
  } else {
    doc["crossings"] = nullptr;
  }
  doc["r1"] = s.r1 ? json{{"n", s.r1->n}, {"rows", s.r1->rows}} : json(nullptr);
  if (s.rc) {
    json rc = json::array();
    for (const auto& e : s.rc->entries)
      rc.push_back({{"i", e.i}, {"j", e.j}, {"d_min", e.d_min}, {"t_min", e.t_min},
                    {"bucket", e.bucket ? json(*e.bucket) : json(nullptr)}});
    doc["rc"] = std::move(rc);
  } else {
    doc["rc"] = nullptr;
  }
  doc["touch"] = pairs_json(s.touch);
  doc["ve"] = optional_labels(s.ve);
  if (s.blocks) {
    json blocks = json::array();
    for (const auto& b : s.blocks->blocks) blocks.push_back({{"label", b.label}, {"members", b.members}});
    doc["blocks"] = {{"blocks", blocks}, {"sizes", s.blocks->sizes}};
  } else {
    doc["blocks"] = nullptr;
  }
  json history = json::array();
  for (const auto& h : s.history)
    history.push_back({{"interval", {h.t0, h.tf}}, {"ve", optional_labels(h.ve)}, {"touch", pairs_json(h.touch)},
                       {"notices", h.notices}});
  doc["history"] = std::move(history);
  doc["notices"] = s.notices;
  return doc.dump(indent);
}

Session session_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("session file is not valid JSON: ") + e.what());
  }
  try {
    Session s = parse_session(doc);
    check_consistency(s);
    return s;
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("session: ") + e.what());
  } catch (const json::exception& e) {
    throw FormatError(std::string("session: ") + e.what());
  }
}

void save_session(const Session& s, const std::filesystem::path& path) {
  const std::string text = session_to_json(s);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write session file " + tmp.string());
    out << text << '\n';
    if (!out.flush()) throw Error("cannot write session file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move session file into place at " + path.string() + ": " + ec.message());
}

Session load_session(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open session file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return session_from_json(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> export_csv(const Session& s, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;
  const int width = static_cast<int>(std::to_string(std::max(1, s.dimension())).size());
  for (const auto& tr : s.traces) {
    std::string index = std::to_string(tr.curve_index);
    index.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(index.size()))), '0');
    const auto path = directory / ("curve_" + index + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "t,re,im\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      out << format_double(tr.times[k]) << ',' << format_double(tr.values[k].real()) << ','
          << format_double(tr.values[k].imag()) << '\n';
    written.push_back(path);
  }
  return written;
}

}  // namespace eigencurve
