#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "madd/cli_io.hpp"
#include "madd/errors.hpp"

using namespace madd;

namespace {

Command cmd(const std::string& verb, const std::string& spec) {
  Command c;
  c.verb = verb;
  c.spec_path = oracle::data(spec);
  return c;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("parse errors carry a location or field") {
  try {
    (void)load_spec(oracle::data("bad_syntax"));
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
  try {
    (void)load_spec(oracle::data("bad_dx"));
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("dx") != std::string::npos);
  }
  CHECK_THROWS_AS((void)parse_spec(R"({"d":1,"p":1,"jumps":[{"from":2,"to":1,"atoms":[]}]})"), SpecError);
  CHECK_THROWS_AS((void)load_spec("/nonexistent/spec.json"), SpecError);
}

TEST_CASE("json round trip") {
  const ProcessSpec s = load_spec(oracle::data("figure_left"));
  const ProcessSpec t = parse_spec(spec_to_json(s));
  CHECK(spec_to_json(t) == spec_to_json(s));
  for (int i = 0; i < s.states(); ++i)
    for (int j = 0; j < s.states(); ++j) CHECK(s.jump(i, j).atoms() == t.jump(i, j).atoms());
}

TEST_CASE("repeated jump entries merge") {
  const ProcessSpec s = parse_spec(R"({"d":1,"p":1,"jumps":[
    {"from":1,"to":1,"atoms":[{"dx":[1],"prob":0.3}]},
    {"from":1,"to":1,"atoms":[{"dx":[1],"prob":0.3},{"dx":[-1],"prob":0.4}]}]})");
  CHECK(s.jump(0, 0).mass_at({1}) == doctest::Approx(0.6));
}

TEST_CASE("twelve significant digits") {
  CHECK(format_real(10.0 / 3.0) == "3.33333333333");
  CHECK(format_real(0.25) == "0.25");
}

TEST_CASE("exit codes") {
  CHECK(run(cmd("validate", "w1")).exit_code == 0);
  CHECK(run(cmd("validate", "bad_syntax")).exit_code == 2);
  CHECK(run(cmd("validate", "bad_row_mass")).exit_code == 2);
  Command b = cmd("boundary", "centered");
  CHECK(run(b).exit_code == 3);
  Command g = cmd("green", "w1");
  g.x = {1};
  g.j = 2;
  CHECK(run(g).exit_code == 3);
  Command r = cmd("green", "w3");
  r.x = {1, 0};
  r.method = "resolvent";
  r.grid = 4;
  CHECK(run(r).exit_code == 4);
  Command cap = cmd("green", "w3");
  cap.x = {1, 0};
  cap.method = "resolvent";
  cap.grid = 1 << 14;
  CHECK(run(cap).exit_code == 5);
  Command u = cmd("nonsense", "w1");
  CHECK(run(u).exit_code != 0);
}

TEST_CASE("green verb output") {
  Command g = cmd("green", "w1");
  g.x = {-3};
  const RunReport rep = run(g);
  REQUIRE(rep.exit_code == 0);
  const std::string text = render(rep);
  CHECK(text.find("value: 0.213333333333") != std::string::npos);
  CHECK(text.find("method: series") != std::string::npos);
}

TEST_CASE("boundary CSV header and byte stability") {
  Command b = cmd("boundary", "w3");
  b.directions = 8;
  const std::string a = run(b).table;
  const std::string c = run(b).table;
  CHECK(a == c);
  CHECK(first_line(a) == "u_1,u_2,c_1,c_2,m_c_1,m_c_2,rho_residual,direction_residual");
  CHECK(std::count(a.begin(), a.end(), '\n') == 9);
}

TEST_CASE("compare CSV header and file output") {
  Command c = cmd("compare", "w2");
  c.u = {-1.0};
  c.radii = {10.0, 20.0};
  c.methods = {"series", "resolvent"};
  const auto path = std::filesystem::temp_directory_path() / "madd_compare_test.csv";
  c.output = path.string();
  const RunReport rep = run(c);
  REQUIRE(rep.exit_code == 0);
  REQUIRE(rep.csv_paths.size() == 1);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(first_line(buf.str()) == "r,x_1,method,value,error,asym,ratio");
  c.output.clear();
  CHECK(run(c).table == buf.str());
  std::filesystem::remove(path);
}

TEST_CASE("simulate CSV is seed-determined") {
  Command s = cmd("simulate", "w2");
  s.steps = 20;
  s.seed = 9;
  const std::string a = run(s).table;
  CHECK(first_line(a) == "n,x_1,state");
  CHECK(run(s).table == a);
  s.seed = 10;
  CHECK(run(s).table != a);
}

TEST_CASE("checks verb passes on W1") {
  Command c = cmd("checks", "w1");
  c.directions = 4;
  c.paths = 4000;
  const RunReport rep = run(c);
  CHECK(rep.exit_code == 0);
  CHECK(rep.error.empty());
}
