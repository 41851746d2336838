#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cvqkd/cli.hpp"
#include "cvqkd/keyrate.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cvqkd");
  std::ostringstream out, err;
  const int code = cvqkd::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> fields(const std::string& text) {
  std::map<std::string, std::string> m;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) m[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return m;
}

double leading_number(const std::string& s) { return std::stod(s); }

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cvqkd_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("rate") {
  const Result r = cli({"rate", "--eta", "0.5", "--vn", "1", "--va", "100"});
  REQUIRE(r.code == 0);
  const auto f = fields(r.out);
  CHECK(leading_number(f.at("delta_I")) == doctest::Approx(0.5754).epsilon(1e-4));
  CHECK(leading_number(f.at("delta_I")) == doctest::Approx(cvqkd::symmetric_key_rate_bound(0.5, 1, 100)).epsilon(1e-11));
  CHECK(f.at("protocol") == "heterodyne");

  const Result h = cli({"rate", "--eta", "0.5", "--protocol", "homodyne"});
  REQUIRE(h.code == 0);
  CHECK(fields(h.out).at("protocol") == "homodyne");
  CHECK(leading_number(fields(h.out).at("delta_I")) < leading_number(f.at("delta_I")));

  const Result bw = cli({"rate", "--bandwidth", "1e6"});
  CHECK(leading_number(fields(bw.out).at("delta_I_abs")) == doctest::Approx(0.5754e6).epsilon(1e-4));
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"rate", "--bogus"}).code == 2);
  CHECK(cli({"rate", "--eta", "abc"}).code == 2);
  CHECK(cli({"rate", "--protocol", "nope"}).code == 2);
  const Result dom = cli({"rate", "--vn", "0.5"});
  CHECK(dom.code == 3);
  CHECK(dom.err.find("V_N") != std::string::npos);
  CHECK(cli({"rate", "--eta", "1.5"}).code == 3);
  CHECK(cli({"rate", "--eta", "0"}).code == 3);
  CHECK(cli({"rate", "--help"}).code == 0);
}

TEST_CASE("binary exit status") {
  auto status = [](const std::string& args) {
    const std::string cmd = std::string(CVQKD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  CHECK(status("rate") == 0);
  CHECK(status("rate --vn 0.5") == 3);
  CHECK(status("frobnicate") == 2);
  CHECK(status("validate --samples 1000 --corrupt-analytic") == 1);
}

TEST_CASE("sweep") {
  const Result r = cli({"sweep", "--eta-start", "0.1", "--eta-stop", "1", "--eta-steps", "10", "--vn-list", "1,2"});
  REQUIRE(r.code == 0);
  const auto rows = csv(r.out);
  REQUIRE(rows.size() == 21);
  CHECK(r.out.rfind("eta,vn_plus,vn_minus,va,delta_i_het,delta_i_hom,delta_i_ff,epsilon_star,window_min,window_max",
                    0) == 0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 10);
    CHECK(rows[i][6].empty());
  }
  // vn-major order
  CHECK(std::stod(rows[1][1]) == 1.0);
  CHECK(std::stod(rows[11][1]) == 2.0);

  SUBCASE("deterministic across runs and thread counts") {
    const std::vector<std::string> args{"sweep", "--eta-steps", "50", "--vn-list", "1,1.5", "--protocols",
                                        "heterodyne,homodyne,feedforward"};
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "4"});
    const Result a = cli(args), b = cli(args), c = cli(threaded);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
  }
  SUBCASE("single step equals rate") {
    const Result s = cli({"sweep", "--eta-start", "0.37", "--eta-steps", "1", "--vn", "1.4", "--protocols", "heterodyne"});
    const Result p = cli({"rate", "--eta", "0.37", "--vn", "1.4"});
    const auto rows1 = csv(s.out);
    REQUIRE(rows1.size() == 2);
    CHECK(rows1[1][4] == fields(p.out).at("delta_I").substr(0, rows1[1][4].size()));
  }
  SUBCASE("unwritable output path") {
    CHECK(cli({"sweep", "--out", "/nonexistent_dir/x.csv"}).code == 4);
  }
  SUBCASE("file output") {
    const auto path = temp_file("sweep.csv");
    REQUIRE(cli({"sweep", "--eta-steps", "5", "--out", path.string()}).code == 0);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(csv(ss.str()).size() == 6);
    std::filesystem::remove(path);
  }
}

TEST_CASE("full grid with feedforward rows") {
  const Result r = cli({"sweep", "--eta-start", "0.01", "--eta-stop", "1", "--eta-steps", "100", "--vn-start", "1",
                        "--vn-stop", "2", "--vn-steps", "3", "--protocols", "heterodyne,feedforward", "--threads", "4"});
  REQUIRE(r.code == 0);
  const auto rows = csv(r.out);
  REQUIRE(rows.size() == 301);
  CHECK(std::stod(rows[1][0]) == doctest::Approx(0.01));
  CHECK(std::stod(rows[1][4]) == doctest::Approx(cvqkd::symmetric_key_rate_bound(0.01, 1, 100)).epsilon(1e-10));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE_FALSE(rows[i][6].empty());
    CHECK(std::stod(rows[i][6]) >= std::stod(rows[i][4]) - 1e-9);
  }
}

TEST_CASE("sign change of the heterodyne rate at V_N = 2") {
  const Result r = cli({"sweep", "--eta-start", "0.5", "--eta-stop", "0.8", "--eta-steps", "301", "--vn", "2",
                        "--protocols", "heterodyne"});
  const auto rows = csv(r.out);
  double crossing = NAN;
  for (std::size_t i = 2; i < rows.size(); ++i)
    if (std::stod(rows[i - 1][4]) < 0 && std::stod(rows[i][4]) >= 0) crossing = std::stod(rows[i][0]);
  // Oracle: bisection on the closed form.
  double lo = 0.5, hi = 0.8;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (cvqkd::symmetric_key_rate_bound(mid, 2, 100) < 0 ? lo : hi) = mid;
  }
  CHECK(crossing == doctest::Approx(hi).epsilon(2e-3));
  CHECK(hi == doctest::Approx(0.64).epsilon(0.01));
}

TEST_CASE("attack") {
  const Result r = cli({"attack", "--eta", "0.5", "--vn", "1"});
  REQUIRE(r.code == 0);
  const auto f = fields(r.out);
  CHECK(leading_number(f.at("epsilon_star")) == doctest::Approx(0.5));
  CHECK(leading_number(f.at("gap")) >= 0.0);
  CHECK(r.out.find("delta_I_ff") != std::string::npos);

  const Result e = cli({"attack", "--eta", "0.5", "--vn-plus", "0.5", "--vn-minus", "2"});
  CHECK(e.code == 0);
  CHECK(e.out.find("attack infeasible") != std::string::npos);
}

TEST_CASE("validate") {
  const Result ok = cli({"validate", "--samples", "200000", "--vn", "1.2"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("all rows pass") != std::string::npos);
  CHECK(cli({"validate", "--samples", "10"}).code == 0);
  CHECK(cli({"validate", "--samples", "20000", "--corrupt-analytic"}).code == 1);
  const Result ff = cli({"validate", "--scenario", "feedforward", "--vn", "1.3", "--samples", "200000", "--shards", "3"});
  CHECK(ff.code == 0);
  CHECK(ff.out.find("V_E|B") != std::string::npos);
  CHECK(cli({"validate", "--scenario", "feedforward", "--epsilon", "0.1"}).code == 3);

  const auto path = temp_file("raw.txt");
  REQUIRE(cli({"validate", "--samples", "300", "--raw-out", path.string()}).code == 0);
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 301);
  std::filesystem::remove(path);
}

TEST_CASE("config file") {
  const auto path = temp_file("cfg.json");
  {
    std::ofstream(path) << R"({"eta": 0.3, "vn": 1.5, "rate": {"protocol": "homodyne"}})";
  }
  const Result from_cfg = cli({"rate", "--config", path.string()});
  REQUIRE(from_cfg.code == 0);
  CHECK(fields(from_cfg.out).at("eta") == "0.3");
  CHECK(fields(from_cfg.out).at("protocol") == "homodyne");
  const Result flag_wins = cli({"rate", "--config", path.string(), "--eta", "0.7"});
  CHECK(fields(flag_wins.out).at("eta") == "0.7");
  const Result flag_before = cli({"rate", "--eta", "0.7", "--config", path.string()});
  CHECK(fields(flag_before.out).at("eta") == "0.7");

  CHECK(cli({"rate", "--config", "/nonexistent/cfg.json"}).code == 4);
  {
    std::ofstream(path) << "{not json";
  }
  CHECK(cli({"rate", "--config", path.string()}).code == 2);
  std::filesystem::remove(path);
}
