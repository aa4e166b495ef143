#include "service.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

namespace eigencurve::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitTouch = 2;

struct ApiFailure : std::runtime_error {
  ApiFailure(ec_status s, const std::string& what, int touch_row)
      : std::runtime_error(what), status(s), row(touch_row) {}
  ec_status status;
  int row;
};

void check(ec_status status) {
  if (status != EC_OK) throw ApiFailure(status, ec_last_error(), ec_last_touch_row());
}

struct SessionHandle {
  ec_session* ptr = nullptr;
  SessionHandle() = default;
  SessionHandle(const SessionHandle&) = delete;
  SessionHandle& operator=(const SessionHandle&) = delete;
  ~SessionHandle() { ec_session_free(ptr); }
  ec_session* release() { return std::exchange(ptr, nullptr); }
};

std::string take(char* text) {
  std::string out = text ? text : "";
  ec_string_free(text);
  return out;
}

json session_json(const ec_session* s, ec_json_kind kind) {
  char* text = nullptr;
  check(ec_session_json(s, kind, &text));
  return json::parse(take(text));
}

void load(SessionHandle& h, const std::string& path) { check(ec_session_load(path.c_str(), &h.ptr)); }

void save(const ec_session* s, const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  check(ec_session_save(s, path.c_str()));
}

std::string tuple_text(const json& values) {
  std::string out = "(";
  for (std::size_t k = 0; k < values.size(); ++k) out += (k ? "," : "") + values[k].dump();
  return out + ")";
}

std::string pair_list(const json& pairs) {
  std::string out;
  for (const auto& p : pairs) out += (out.empty() ? "" : " ") + tuple_text(p);
  return out.empty() ? "none" : out;
}

void print_notices(const json& notices) {
  for (const auto& n : notices) std::cout << "notice: " << n.get<std::string>() << '\n';
}

void print_labels(const json& summary) {
  if (summary["ve"].is_null()) return;
  std::cout << "ve = " << tuple_text(summary["ve"]) << '\n';
  std::cout << "block sizes = " << tuple_text(summary["block_sizes"]) << '\n';
}

struct ProgressPrinter {
  bool quiet;
  int last = -1;
  static void callback(const char* phase, double fraction, void* user) {
    auto* self = static_cast<ProgressPrinter*>(user);
    if (self->quiet) return;
    const int decile = static_cast<int>(fraction * 10.0);
    if (decile == self->last) return;
    self->last = decile;
    std::fprintf(stderr, "%s %3d%%\n", phase, decile * 10);
  }
};

std::string touch_json_error(const ApiFailure& e) {
  return json{{"error", e.what()}, {"status", ec_status_name(e.status)}, {"row", e.row}}.dump();
}

int http_status_for(ec_status s) {
  switch (s) {
    case EC_ERR_TOUCH: return 409;
    case EC_ERR_INVALID_ARGUMENT:
    case EC_ERR_DOMAIN:
    case EC_ERR_FORMAT: return 400;
    default: return 500;
  }
}

}  // namespace

std::string default_session_path() {
  if (const char* dir = std::getenv("EIGENCURVE_SESSION_DIR"); dir && *dir) return (fs::path(dir) / "session.json").string();
  return "session.json";
}

std::vector<int> parse_touch_file(const std::string& path, std::vector<int>* lines) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open Touch file " + path);
  std::vector<int> pairs;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    std::istringstream row(line);
    std::vector<long> values;
    std::string token;
    while (row >> token) {
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size())
        throw std::runtime_error(path + ":" + std::to_string(number) + ": expected integer curve index, got '" + token + "'");
      values.push_back(v);
    }
    if (values.empty()) continue;
    if (values.size() != 2)
      throw std::runtime_error(path + ":" + std::to_string(number) + ": expected two curve indices per line");
    pairs.push_back(static_cast<int>(values[0]));
    pairs.push_back(static_cast<int>(values[1]));
    if (lines) lines->push_back(number);
  }
  return pairs;
}

// ---------------------------------------------------------------- HTTP server

SessionServer::SessionServer(ec_session* session, std::string save_path)
    : session_(session), save_path_(std::move(save_path)), http_(std::make_unique<httplib::Server>()) {
  routes();
}

SessionServer::~SessionServer() {
  stop();
  ec_session_free(session_);
}

int SessionServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

bool SessionServer::listen() { return http_->listen_after_bind(); }

void SessionServer::stop() {
  if (http_->is_running()) http_->stop();
}

void SessionServer::wait_until_ready() const { http_->wait_until_ready(); }

void SessionServer::routes() {
  auto& http = *http_;
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  const auto reply_error = [](httplib::Response& res, const ApiFailure& e) {
    res.status = http_status_for(e.status);
    res.set_content(touch_json_error(e), "application/json");
  };
  const auto bad_request = [](httplib::Response& res, const std::string& message) {
    res.status = 400;
    res.set_content(json{{"error", message}, {"status", "bad request"}}.dump(), "application/json");
  };

  const auto read_kind = [this, reply_error](ec_json_kind kind) {
    return [this, kind, reply_error](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(mutex_);
      try {
        char* text = nullptr;
        check(ec_session_json(session_, kind, &text));
        res.set_content(take(text), "application/json");
      } catch (const ApiFailure& e) {
        reply_error(res, e);
      }
    };
  };
  http.Get("/session", read_kind(EC_JSON_SESSION));
  http.Get("/curves", read_kind(EC_JSON_PLOT));
  http.Get("/summary", read_kind(EC_JSON_SUMMARY));

  http.Get("/suggestions", [this, reply_error, bad_request](const httplib::Request& req, httplib::Response& res) {
    double gap = 0.3, min_score = 0.5;
    int window = 50;
    try {
      if (req.has_param("gap")) gap = std::stod(req.get_param_value("gap"));
      if (req.has_param("window")) window = std::stoi(req.get_param_value("window"));
      if (req.has_param("min_score")) min_score = std::stod(req.get_param_value("min_score"));
    } catch (const std::exception&) {
      bad_request(res, "suggestions: gap, window and min_score must be numbers");
      return;
    }
    std::shared_lock lock(mutex_);
    try {
      char* text = nullptr;
      check(ec_session_suggestions(session_, gap, window, min_score, &text));
      res.set_content(take(text), "application/json");
    } catch (const ApiFailure& e) {
      reply_error(res, e);
    }
  });

  // Never takes the session lock, so it answers while a mutation is running.
  http.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
    char phase[32] = {0};
    double fraction = 0.0;
    ec_session_status(session_, phase, sizeof phase, &fraction);
    res.set_content(json{{"phase", phase}, {"fraction", fraction}}.dump(), "application/json");
  });

  http.Post("/touch", [this, reply_error, bad_request](const httplib::Request& req, httplib::Response& res) {
    std::vector<int> flat;
    try {
      const json body = json::parse(req.body);
      for (const auto& p : body.at("pairs")) {
        if (!p.is_array() || p.size() != 2) throw std::runtime_error("each pair must be [a, b]");
        flat.push_back(p[0].get<int>());
        flat.push_back(p[1].get<int>());
      }
    } catch (const std::exception& e) {
      bad_request(res, std::string("touch: expected {\"pairs\": [[a,b],...]}: ") + e.what());
      return;
    }
    std::unique_lock lock(mutex_);
    try {
      check(ec_session_touch(session_, flat.data(), flat.size() / 2));
      if (!save_path_.empty()) save(session_, save_path_);
      const json summary = session_json(session_, EC_JSON_SUMMARY);
      res.set_content(json{{"ve", summary["ve"]}, {"block_sizes", summary["block_sizes"]}, {"touch", summary["touch"]}}.dump(),
                      "application/json");
    } catch (const ApiFailure& e) {
      if (e.status == EC_ERR_TOUCH && e.row > 0) {
        const auto k = static_cast<std::size_t>(e.row - 1) * 2;
        res.status = 409;
        res.set_content(json{{"error", e.what()},
                             {"status", ec_status_name(e.status)},
                             {"row", e.row},
                             {"pair", {flat[k], flat[k + 1]}}}
                            .dump(),
                        "application/json");
        return;
      }
      reply_error(res, e);
    }
  });

  http.Post("/extend", [this, reply_error, bad_request](const httplib::Request& req, httplib::Response& res) {
    double t0 = 0.0, tf = 0.0;
    try {
      const json body = json::parse(req.body);
      t0 = body.at("t0").get<double>();
      tf = body.at("tf").get<double>();
    } catch (const std::exception& e) {
      bad_request(res, std::string("extend: expected {\"t0\": number, \"tf\": number}: ") + e.what());
      return;
    }
    std::unique_lock lock(mutex_);
    try {
      char* notices = nullptr;
      check(ec_session_extend(session_, t0, tf, nullptr, nullptr, &notices));
      const json remap = json::parse(take(notices));
      if (!save_path_.empty()) save(session_, save_path_);
      res.set_content(json{{"notices", remap}, {"summary", session_json(session_, EC_JSON_SUMMARY)}}.dump(),
                      "application/json");
    } catch (const ApiFailure& e) {
      reply_error(res, e);
    }
  });
}

// ---------------------------------------------------------------- CLI

int run(int argc, const char* const* argv) {
  CLI::App app{"Eigencurve tracing, crossing analysis and block-structure inference"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(ec_version()));

  std::string session_path = default_session_path();
  bool quiet = false;
  app.add_option("--session", session_path, "Session file (default: $EIGENCURVE_SESSION_DIR/session.json)");
  app.add_flag("-q,--quiet", quiet, "No progress output");

  // trace
  auto* trace = app.add_subcommand("trace", "Create a session and trace all eigencurves");
  std::string flow;
  std::uint64_t seed = 0;
  bool no_obscure = false;
  std::vector<std::string> params;
  double t0 = 0.0, tf = 0.0;
  ec_trace_config cfg;
  ec_trace_config_default(&cfg);
  std::vector<int> formula;
  bool oracle = false, store_vectors = false;
  trace->add_option("--flow", flow, "Gallery flow name")->required();
  auto* seed_opt = trace->add_option("--seed", seed, "Seed of the obscuring similarity");
  trace->add_flag("--no-obscure", no_obscure, "Use the plain flow even when a seed is given");
  trace->add_option("--param", params, "Flow parameter as name=value (repeatable)");
  trace->add_option("--t0", t0, "Interval start")->required();
  trace->add_option("--tf", tf, "Interval end")->required();
  trace->add_option("--tau", cfg.tau, "Sampling gap")->capture_default_str();
  trace->add_option("--eta", cfg.eta, "Decay constant")->capture_default_str();
  trace->add_option("--formula", formula, "Look-ahead formula as: j s")->expected(2);
  trace->add_option("--restart-threshold", cfg.restart_threshold, "Condition number that triggers a restart")
      ->capture_default_str();
  trace->add_option("--max-restarts", cfg.max_restarts_per_curve, "Restarts per curve before it is flagged degenerate")
      ->capture_default_str();
  trace->add_option("--residual-tol", cfg.residual_tolerance, "Eigen-residual that triggers a re-seed")
      ->capture_default_str();
  trace->add_option("--audit-interval", cfg.audit_interval, "Steps between static-eigensolve audits")
      ->capture_default_str();
  trace->add_flag("--oracle", oracle, "Trace by static eigensolves instead of ZNN");
  trace->add_flag("--store-vectors", store_vectors, "Keep eigenvectors in the session file");

  auto* analyze = app.add_subcommand("analyze", "Detect crossings and near-approaches");
  auto* infer = app.add_subcommand("infer", "Infer block labels ve from the crossing data");

  auto* touch = app.add_subcommand("touch", "Apply a Touch file (one curve pair per line) and re-infer");
  std::string touch_path;
  touch->add_option("--pairs", touch_path, "Touch file")->required()->check(CLI::ExistingFile);

  auto* extend = app.add_subcommand("extend", "Enlarge the session interval and recompute");
  std::optional<double> new_t0, new_tf;
  extend->add_option("--t0", new_t0, "New interval start (<= current)");
  extend->add_option("--tf", new_tf, "New interval end (>= current)");

  auto* exporter = app.add_subcommand("export", "Write per-curve CSV files and plot-data JSON");
  std::string out_dir;
  exporter->add_option("--out", out_dir, "Output directory (default: export/ next to the session)");

  auto* serve = app.add_subcommand("serve", "Serve the session over HTTP");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  ProgressPrinter progress{quiet};
  try {
    SessionHandle s;
    if (*trace) {
      json param_object = json::object();
      for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--param expects name=value, got '" + p + "'");
        try {
          param_object[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
        } catch (const std::exception&) {
          throw std::runtime_error("--param " + p + ": value is not a number");
        }
      }
      if (!formula.empty()) {
        cfg.order = formula[0];
        cfg.past_points = formula[1];
      }
      cfg.use_oracle = oracle ? 1 : 0;
      cfg.store_vectors = store_vectors ? 1 : 0;
      const bool obscure = seed_opt->count() > 0 && !no_obscure;
      check(ec_session_create(flow.c_str(), seed, obscure ? 1 : 0, param_object.dump().c_str(), t0, tf, &cfg, &s.ptr));
      check(ec_session_trace(s.ptr, &ProgressPrinter::callback, &progress));
      save(s.ptr, session_path);
      const json summary = session_json(s.ptr, EC_JSON_SUMMARY);
      int restarts = 0;
      for (const auto& r : summary["restarts"]) restarts += r.get<int>();
      std::cout << "traced " << summary["n"] << " curves of " << summary["flow"].get<std::string>() << " on ["
                << summary["interval"][0] << ", " << summary["interval"][1] << "], " << summary["samples"]
                << " samples, tracker " << summary["tracker"].get<std::string>() << ", restarts " << restarts << '\n';
      if (summary["degenerate"].get<bool>()) std::cout << "warning: at least one curve is flagged degenerate\n";
      print_notices(summary["notices"]);
    } else if (*analyze) {
      load(s, session_path);
      check(ec_session_analyze(s.ptr));
      save(s.ptr, session_path);
      const json summary = session_json(s.ptr, EC_JSON_SUMMARY);
      if (summary["crossing_pairs"].is_null())
        std::cout << "complex traces: no crossing data, near-approach table only\n";
      else
        std::cout << "crossing pairs: " << pair_list(summary["crossing_pairs"]) << '\n';
      if (!summary["closest_approach"].is_null()) {
        const auto& c = summary["closest_approach"];
        std::cout << "closest approach: curves (" << c["i"] << "," << c["j"] << ") d_min = " << c["d_min"]
                  << " at t = " << c["t_min"] << '\n';
      }
    } else if (*infer) {
      load(s, session_path);
      char* caveats = nullptr;
      check(ec_session_infer(s.ptr, &caveats));
      const json notes = json::parse(take(caveats));
      save(s.ptr, session_path);
      print_labels(session_json(s.ptr, EC_JSON_SUMMARY));
      for (const auto& c : notes) std::cout << "caveat: " << c.get<std::string>() << '\n';
    } else if (*touch) {
      std::vector<int> lines;
      const auto pairs = parse_touch_file(touch_path, &lines);
      load(s, session_path);
      try {
        check(ec_session_touch(s.ptr, pairs.data(), pairs.size() / 2));
      } catch (const ApiFailure& e) {
        if (e.status == EC_ERR_TOUCH && e.row > 0 && e.row <= static_cast<int>(lines.size()))
          throw ApiFailure(e.status, std::string(e.what()) + " [" + touch_path + " line " +
                                         std::to_string(lines[static_cast<std::size_t>(e.row - 1)]) + "]",
                           e.row);
        throw;
      }
      save(s.ptr, session_path);
      print_labels(session_json(s.ptr, EC_JSON_SUMMARY));
    } else if (*extend) {
      load(s, session_path);
      const json before = session_json(s.ptr, EC_JSON_SUMMARY);
      const double a = new_t0.value_or(before["interval"][0].get<double>());
      const double b = new_tf.value_or(before["interval"][1].get<double>());
      char* notices = nullptr;
      check(ec_session_extend(s.ptr, a, b, &ProgressPrinter::callback, &progress, &notices));
      const json remap = json::parse(take(notices));
      save(s.ptr, session_path);
      const json summary = session_json(s.ptr, EC_JSON_SUMMARY);
      std::cout << "interval extended to [" << summary["interval"][0] << ", " << summary["interval"][1] << "]\n";
      print_notices(remap);
      print_labels(summary);
    } else if (*exporter) {
      load(s, session_path);
      if (out_dir.empty()) out_dir = (fs::path(session_path).parent_path() / "export").string();
      check(ec_session_export_csv(s.ptr, out_dir.c_str()));
      const auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::trunc);
        if (!(out << text << '\n')) throw std::runtime_error("cannot write " + (fs::path(out_dir) / name).string());
      };
      write("plot.json", session_json(s.ptr, EC_JSON_PLOT).dump());
      char* suggestions = nullptr;
      check(ec_session_suggestions(s.ptr, 0.3, 50, 0.5, &suggestions));
      write("suggestions.json", take(suggestions));
      std::cout << "exported to " << out_dir << '\n';
    } else if (*serve) {
      load(s, session_path);
      SessionServer server(s.release(), session_path);
      const int bound = server.bind(host, port);
      if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
      std::cout << "serving " << session_path << " on http://" << host << ":" << bound << std::endl;
      if (!server.listen()) throw std::runtime_error("HTTP server stopped unexpectedly");
    }
    return kExitOk;
  } catch (const ApiFailure& e) {
    std::cerr << "eigencurve " << command << ": " << ec_status_name(e.status) << ": " << e.what() << '\n';
    return e.status == EC_ERR_TOUCH ? kExitTouch : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "eigencurve " << command << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace eigencurve::cli
