#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef EIGENCURVE_CLI_PATH
#error "EIGENCURVE_CLI_PATH must point at the CLI executable"
#endif

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path workdir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eigencurve_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the CLI executable; `env` is prefixed to the command line.
Result cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" EIGENCURVE_CLI_PATH "' -q " + args +
                          " > out.txt 2> err.txt";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "out.txt");
  r.err = slurp(dir / "err.txt");
  return r;
}

json session_file(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli_service") {
  TEST_CASE("trace, analyze, infer on the 6x6 flow with the (5,6) request") {
    const auto dir = workdir("pipeline");
    auto r = cli(dir, "--session s.json trace --flow stackexchange6 --seed 7 --t0 -0.3 --tf 0.1 --tau 1e-4 --formula 5 6");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("using (4,6)") != std::string::npos);
    REQUIRE(cli(dir, "--session s.json analyze").code == 0);
    r = cli(dir, "--session s.json infer");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("ve = (1,-1,2,2,-2,-2)") != std::string::npos);
    CHECK(session_file(dir / "s.json")["ve"] == json({1, -1, 2, 2, -2, -2}));

    // Re-running analyze leaves the file untouched.
    const std::string before = slurp(dir / "s.json");
    REQUIRE(cli(dir, "--session s.json analyze").code == 0);
    CHECK(slurp(dir / "s.json") == before);

    // A Touch row joining crossing curves exits with 2 and names the row.
    std::ofstream(dir / "bad.touch") << "# pairs\n3 4\n\n1,2\n";
    r = cli(dir, "--session s.json touch --pairs bad.touch");
    CHECK(r.code == 2);
    CHECK(r.err.find("Touch row 2") != std::string::npos);
    CHECK(r.err.find("bad.touch line 4") != std::string::npos);
    CHECK(slurp(dir / "s.json") == before);

    std::ofstream(dir / "ok.touch") << "3 4\n";
    r = cli(dir, "--session s.json touch --pairs ok.touch");
    CHECK(r.code == 0);
    CHECK(session_file(dir / "s.json")["touch"] == json({{3, 4}}));

    r = cli(dir, "--session s.json export --out ex");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "ex" / "curve_1.csv"));
    const json plot = json::parse(slurp(dir / "ex" / "plot.json"));
    CHECK(plot["crossings"].size() == 9);
    CHECK(fs::exists(dir / "ex" / "suggestions.json"));
  }

  TEST_CASE("identical flags give byte-identical session files") {
    const auto dir = workdir("determinism");
    const std::string args = "trace --flow a4 --seed 3 --t0 0 --tf 1";
    REQUIRE(cli(dir, "--session one.json " + args).code == 0);
    REQUIRE(cli(dir, "--session two.json " + args).code == 0);
    CHECK(slurp(dir / "one.json") == slurp(dir / "two.json"));
    CHECK(session_file(dir / "one.json")["flow"]["obscure"] == true);
  }

  TEST_CASE("infer without crossings prints the caveat") {
    const auto dir = workdir("nocross");
    REQUIRE(cli(dir, "trace --flow random_hermitean --param n=3 --t0 0 --tf 0.5 --oracle").code == 0);
    REQUIRE(cli(dir, "analyze").code == 0);
    const auto r = cli(dir, "infer");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("ve = (1,2,3)") != std::string::npos);
    CHECK(r.out.find("block sizes = (1,1,1)") != std::string::npos);
    CHECK(r.out.find("caveat:") != std::string::npos);
  }

  TEST_CASE("session directory from the environment") {
    const auto dir = workdir("envdir");
    const auto r = cli(dir, "trace --flow diag5 --t0 0 --tf 1 --oracle", "EIGENCURVE_SESSION_DIR=store");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "store" / "session.json"));
  }

  TEST_CASE("extend through the CLI") {
    const auto dir = workdir("extend");
    REQUIRE(cli(dir, "trace --flow stackexchange6 --seed 7 --t0 -0.3 --tf 0.1 --oracle").code == 0);
    REQUIRE(cli(dir, "analyze").code == 0);
    REQUIRE(cli(dir, "infer").code == 0);
    auto r = cli(dir, "extend --t0 -0.4");
    REQUIRE(r.code == 0);
    const json s = session_file(dir / "session.json");
    CHECK(s["interval"][0] == -0.4);
    CHECK(s["history"].size() == 1);
    r = cli(dir, "extend --t0 -0.2");
    CHECK(r.code == 1);
    CHECK(r.err.find("does not contain") != std::string::npos);
  }

  TEST_CASE("failures exit with 1") {
    const auto dir = workdir("failures");
    CHECK(cli(dir, "trace --flow nope --t0 0 --tf 1").code == 1);
    CHECK(cli(dir, "trace --flow diag5 --t0 1 --tf 0").code == 1);
    CHECK(cli(dir, "trace --flow diag5 --t0 0").code == 1);
    CHECK(cli(dir, "analyze --session missing.json").code == 1);
    CHECK(cli(dir, "frobnicate").code == 1);
    CHECK(cli(dir, "--help").code == 0);
    std::ofstream(dir / "junk.touch") << "1 two\n";
    CHECK(cli(dir, "touch --pairs junk.touch").code == 1);
  }

  TEST_CASE("touch file parsing") {
    const auto dir = workdir("touchfile");
    std::ofstream(dir / "t.touch") << "# comment\n 1 2 \n\n3,4  # trailing\n5\t6\n";
    std::vector<int> lines;
    CHECK(eigencurve::cli::parse_touch_file((dir / "t.touch").string(), &lines) == std::vector<int>{1, 2, 3, 4, 5, 6});
    CHECK(lines == std::vector<int>{2, 4, 5});
    std::ofstream(dir / "three.touch") << "1 2 3\n";
    CHECK_THROWS(eigencurve::cli::parse_touch_file((dir / "three.touch").string()));
  }

  TEST_CASE("HTTP endpoints") {
    const auto dir = workdir("http");
    REQUIRE(cli(dir, "--session s.json trace --flow stackexchange6 --seed 7 --t0 -0.3 --tf 0.1 --tau 1e-4 --oracle").code == 0);
    REQUIRE(cli(dir, "--session s.json analyze").code == 0);
    REQUIRE(cli(dir, "--session s.json infer").code == 0);

    ec_session* handle = nullptr;
    REQUIRE(ec_session_load((dir / "s.json").string().c_str(), &handle) == EC_OK);
    eigencurve::cli::SessionServer server(handle, (dir / "s.json").string());
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread loop([&] { server.listen(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);

    auto res = client.Get("/session");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["ve"] == json({1, -1, 2, 2, -2, -2}));

    res = client.Get("/curves");
    REQUIRE(res);
    CHECK(json::parse(res->body)["crossings"].size() == 9);

    res = client.Get("/suggestions?gap=0.5");
    REQUIRE(res);
    CHECK(json::parse(res->body)["advisory"] == true);
    CHECK(client.Get("/suggestions?gap=abc")->status == 400);

    res = client.Get("/status");
    REQUIRE(res);
    CHECK(json::parse(res->body)["phase"] == "idle");

    res = client.Post("/touch", R"({"pairs": [[3, 4]]})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["ve"] == json({1, -1, 2, 2, -2, -2}));
    CHECK(session_file(dir / "s.json")["touch"] == json({{3, 4}}));

    res = client.Post("/touch", R"({"pairs": [[3, 4], [1, 2]]})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);
    const json conflict = json::parse(res->body);
    CHECK(conflict["row"] == 2);
    CHECK(conflict["pair"] == json({1, 2}));
    CHECK(conflict["error"].get<std::string>().find("row 2") != std::string::npos);

    CHECK(client.Post("/touch", R"({"pairs": [[1]]})", "application/json")->status == 400);
    CHECK(client.Post("/touch", "nonsense", "application/json")->status == 400);
    CHECK(client.Post("/touch", R"({"pairs": [[0, 9]]})", "application/json")->status == 400);

    // Undo: resend the list without the row.
    res = client.Post("/touch", R"({"pairs": []})", "application/json");
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["touch"].empty());

    CHECK(client.Post("/extend", R"({"t0": -0.2, "tf": 0.1})", "application/json")->status == 400);
    CHECK(client.Post("/extend", R"({"t0": "x"})", "application/json")->status == 400);

    // Poll /status while a long extension runs.
    std::atomic<bool> finished{false};
    std::atomic<int> extend_polls{0};
    std::thread poller([&] {
      httplib::Client c2("127.0.0.1", port);
      while (!finished) {
        if (auto s = c2.Get("/status"); s && json::parse(s->body)["phase"] == "extend") ++extend_polls;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
    });
    res = client.Post("/extend", R"({"t0": -0.6, "tf": 0.1})", "application/json");
    finished = true;
    poller.join();
    REQUIRE(res);
    CHECK(res->status == 200);
    const json body = json::parse(res->body);
    CHECK(body["summary"]["interval"][0] == -0.6);
    CHECK(body["notices"].is_array());
    CHECK(extend_polls > 0);
    CHECK(session_file(dir / "s.json")["history"].size() == 1);

    server.stop();
    loop.join();
  }
}
