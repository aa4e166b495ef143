#include "eigencurve/eigencurve.h"

#include <cstring>
#include <filesystem>
#include <mutex>
#include <string>

#include <json.hpp>

#include "eigencurve/errors.hpp"
#include "eigencurve/pipeline.hpp"

using namespace eigencurve;

struct ec_session {
  Session state;
  mutable std::mutex status_mutex;
  std::string phase = "idle";
  double fraction = 0.0;

  void set_status(const char* p, double f) {
    std::lock_guard lock(status_mutex);
    phase = p;
    fraction = f;
  }
};

namespace {

thread_local std::string last_error;
thread_local int last_touch_row = 0;

ec_status fail(ec_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
ec_status guarded(F&& body) {
  last_error.clear();
  last_touch_row = 0;
  try {
    body();
    return EC_OK;
  } catch (const TouchError& e) {
    last_touch_row = e.row();
    return fail(EC_ERR_TOUCH, e.what());
  } catch (const InvalidArgument& e) {
    return fail(EC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const DomainError& e) {
    return fail(EC_ERR_DOMAIN, e.what());
  } catch (const NumericalError& e) {
    return fail(EC_ERR_NUMERICAL, e.what());
  } catch (const FormatError& e) {
    return fail(EC_ERR_FORMAT, e.what());
  } catch (const Error& e) {
    return fail(EC_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(EC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(EC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EC_ERR_INTERNAL, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " must not be NULL");
}

ZNNConfig to_config(const ec_trace_config& c) {
  ZNNConfig cfg;
  cfg.tau = c.tau;
  cfg.eta = c.eta;
  cfg.order = c.order;
  cfg.past_points = c.past_points;
  cfg.restart_threshold = c.restart_threshold;
  cfg.max_restarts_per_curve = c.max_restarts_per_curve;
  cfg.residual_tolerance = c.residual_tolerance;
  cfg.audit_interval = c.audit_interval;
  cfg.store_vectors = c.store_vectors != 0;
  return cfg;
}

ProgressFn progress_bridge(ec_session* s, const char* phase, ec_progress_fn fn, void* user) {
  return [s, phase, fn, user](double f) {
    s->set_status(phase, f);
    if (fn) fn(phase, f, user);
  };
}

nlohmann::json summary(const Session& s) {
  using nlohmann::json;
  json pairs = json::array();
  if (s.crossings)
    for (const auto& [i, j] : s.crossings->pairs()) pairs.push_back({i, j});
  json restarts = json::array();
  bool degenerate = false;
  for (const auto& tr : s.traces) {
    restarts.push_back(tr.restarts.size());
    degenerate = degenerate || tr.degenerate;
  }
  json closest = nullptr;
  if (s.rc && !s.rc->entries.empty()) {
    const auto& c = s.rc->closest();
    closest = {{"i", c.i}, {"j", c.j}, {"d_min", c.d_min}, {"t_min", c.t_min}};
  }
  json touch = json::array();
  for (const auto& [a, b] : s.touch) touch.push_back({a, b});
  return {{"flow", s.flow.name},
          {"seed", s.flow.seed},
          {"n", s.dimension()},
          {"interval", {s.t0, s.tf}},
          {"tracker", to_string(s.tracker)},
          {"formula", {s.cfg.order, s.cfg.past_points}},
          {"samples", s.traces.empty() ? 0 : s.traces.front().times.size()},
          {"restarts", restarts},
          {"degenerate", degenerate},
          {"crossing_pairs", s.crossings ? pairs : json(nullptr)},
          {"closest_approach", closest},
          {"touch", touch},
          {"ve", s.ve ? json(*s.ve) : json(nullptr)},
          {"block_sizes", s.blocks ? json(s.blocks->sizes) : json(nullptr)},
          {"history_length", s.history.size()},
          {"notices", s.notices}};
}

}  // namespace

extern "C" {

const char* ec_version(void) { return "1.0.0"; }

const char* ec_last_error(void) { return last_error.c_str(); }

int ec_last_touch_row(void) { return last_touch_row; }

const char* ec_status_name(ec_status status) {
  switch (status) {
    case EC_OK: return "ok";
    case EC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EC_ERR_DOMAIN: return "domain error";
    case EC_ERR_NUMERICAL: return "numerical error";
    case EC_ERR_FORMAT: return "format error";
    case EC_ERR_TOUCH: return "touch error";
    case EC_ERR_IO: return "i/o error";
    case EC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ec_string_free(char* s) { std::free(s); }

void ec_trace_config_default(ec_trace_config* cfg) {
  if (!cfg) return;
  const ZNNConfig d;
  *cfg = ec_trace_config{d.tau, d.eta, d.order, d.past_points, d.restart_threshold, d.max_restarts_per_curve,
                         d.residual_tolerance, d.audit_interval, d.store_vectors ? 1 : 0, 0};
}

ec_status ec_session_create(const char* flow_name, uint64_t seed, int obscure, const char* params_json, double t0,
                            double tf, const ec_trace_config* cfg, ec_session** out) {
  return guarded([&] {
    require(flow_name, "flow_name");
    require(out, "out");
    *out = nullptr;
    FlowRef ref{flow_name, seed, obscure != 0, {}};
    if (params_json && *params_json) {
      nlohmann::json params;
      try {
        params = nlohmann::json::parse(params_json);
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("flow parameters are not valid JSON: ") + e.what());
      }
      if (!params.is_object()) throw InvalidArgument("flow parameters must be a JSON object");
      for (const auto& [k, v] : params.items()) {
        if (!v.is_number()) throw InvalidArgument("flow parameter '" + k + "' must be numeric");
        ref.params[k] = v.get<double>();
      }
    }
    ec_trace_config defaults;
    ec_trace_config_default(&defaults);
    const ec_trace_config& c = cfg ? *cfg : defaults;
    auto handle = std::make_unique<ec_session>();
    handle->state = make_session(ref, t0, tf, to_config(c), c.use_oracle ? Provenance::Oracle : Provenance::Znn);
    *out = handle.release();
  });
}

ec_status ec_session_load(const char* path, ec_session** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<ec_session>();
    handle->state = load_session(path);
    *out = handle.release();
  });
}

ec_status ec_session_from_json(const char* json, ec_session** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<ec_session>();
    handle->state = session_from_json(json);
    *out = handle.release();
  });
}

ec_status ec_session_save(const ec_session* session, const char* path) {
  return guarded([&] {
    require(session, "session");
    require(path, "path");
    save_session(session->state, path);
  });
}

void ec_session_free(ec_session* session) { delete session; }

ec_status ec_session_trace(ec_session* session, ec_progress_fn progress, void* user) {
  return guarded([&] {
    require(session, "session");
    session->set_status("trace", 0.0);
    try {
      Session next = session->state;
      run_trace(next, progress_bridge(session, "trace", progress, user));
      session->state = std::move(next);
    } catch (...) {
      session->set_status("idle", 0.0);
      throw;
    }
    session->set_status("idle", 1.0);
  });
}

ec_status ec_session_analyze(ec_session* session) {
  return guarded([&] {
    require(session, "session");
    Session next = session->state;
    run_analyze(next);
    session->state = std::move(next);
  });
}

ec_status ec_session_infer(ec_session* session, char** caveats_json) {
  return guarded([&] {
    require(session, "session");
    Session next = session->state;
    const auto caveats = run_infer(next);
    std::string text = nlohmann::json(caveats).dump();
    char* copy = caveats_json ? duplicate(text) : nullptr;
    session->state = std::move(next);
    if (caveats_json) *caveats_json = copy;
  });
}

ec_status ec_session_touch(ec_session* session, const int* pairs, size_t count) {
  return guarded([&] {
    require(session, "session");
    if (count > 0) require(pairs, "pairs");
    TouchList touch;
    for (size_t k = 0; k < count; ++k) touch.emplace_back(pairs[2 * k], pairs[2 * k + 1]);
    run_touch(session->state, touch);
  });
}

ec_status ec_session_extend(ec_session* session, double t0, double tf, ec_progress_fn progress, void* user,
                            char** notices_json) {
  return guarded([&] {
    require(session, "session");
    session->set_status("extend", 0.0);
    std::vector<std::string> notices;
    try {
      notices = extend_interval(session->state, t0, tf, progress_bridge(session, "extend", progress, user));
    } catch (...) {
      session->set_status("idle", 0.0);
      throw;
    }
    session->set_status("idle", 1.0);
    if (notices_json) *notices_json = duplicate(nlohmann::json(notices).dump());
  });
}

ec_status ec_session_export_csv(const ec_session* session, const char* directory) {
  return guarded([&] {
    require(session, "session");
    require(directory, "directory");
    export_csv(session->state, directory);
  });
}

ec_status ec_session_json(const ec_session* session, ec_json_kind kind, char** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    *out = nullptr;
    std::string text;
    switch (kind) {
      case EC_JSON_SESSION: text = session_to_json(session->state); break;
      case EC_JSON_PLOT: text = plot_data_json(session->state); break;
      case EC_JSON_SUMMARY: text = summary(session->state).dump(); break;
      default: throw InvalidArgument("unknown JSON kind");
    }
    *out = duplicate(text);
  });
}

ec_status ec_session_suggestions(const ec_session* session, double gap_threshold, int angle_window, double min_score,
                                 char** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    *out = nullptr;
    TouchOptions options;
    options.gap_threshold = gap_threshold;
    options.angle_window = angle_window;
    options.min_score = min_score;
    *out = duplicate(suggestions_json(session->state, options));
  });
}

ec_status ec_session_dimension(const ec_session* session, int* n) {
  return guarded([&] {
    require(session, "session");
    require(n, "n");
    *n = session->state.dimension();
  });
}

ec_status ec_session_labels(const ec_session* session, int* labels, size_t cap, int* has_labels) {
  return guarded([&] {
    require(session, "session");
    require(has_labels, "has_labels");
    const auto& ve = session->state.ve;
    *has_labels = ve ? 1 : 0;
    if (!ve) return;
    if (cap < ve->size()) throw InvalidArgument("label buffer too small");
    require(labels, "labels");
    std::copy(ve->begin(), ve->end(), labels);
  });
}

ec_status ec_session_status(const ec_session* session, char* phase, size_t phase_cap, double* fraction) {
  if (!session) return fail(EC_ERR_INVALID_ARGUMENT, "session must not be NULL");
  std::lock_guard lock(session->status_mutex);
  if (phase && phase_cap > 0) {
    std::strncpy(phase, session->phase.c_str(), phase_cap - 1);
    phase[phase_cap - 1] = '\0';
  }
  if (fraction) *fraction = session->fraction;
  return EC_OK;
}

}  // extern "C"
