#pragma once

#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "eigencurve/eigencurve.h"

namespace httplib {
class Server;
}

namespace eigencurve::cli {

/// Runs one CLI invocation; returns the process exit code.
int run(int argc, const char* const* argv);

/// Session path used when --session is not given.
std::string default_session_path();

/// Parses a Touch file: one pair per line as "a b" or "a,b"; blank lines and
/// text after '#' ignored. `lines` receives the file line of every pair.
std::vector<int> parse_touch_file(const std::string& path, std::vector<int>* lines = nullptr);

/// HTTP front end for a single session. Takes ownership of the handle.
class SessionServer {
 public:
  SessionServer(ec_session* session, std::string save_path);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds to host:port (port 0 picks a free port); returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  void routes();

  ec_session* session_;
  std::string save_path_;
  std::shared_mutex mutex_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace eigencurve::cli
