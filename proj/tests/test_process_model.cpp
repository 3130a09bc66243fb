#include "doctest.h"
#include "oracles.hpp"

#include "madd/cli_io.hpp"
#include "madd/errors.hpp"
#include "madd/process_model.hpp"

using namespace madd;

TEST_CASE("row mass violations are spec errors") {
  JumpMeasure a;
  a.add({1}, 0.5);
  CHECK_THROWS_AS(ProcessSpec(1, 1, {a}), SpecError);
  JumpMeasure b;
  b.add({1, 0}, 1.0);
  CHECK_THROWS_AS(ProcessSpec(1, 1, {b}), SpecError);
}

TEST_CASE("atoms merge on insertion") {
  JumpMeasure a;
  a.add({1}, 0.25);
  a.add({1}, 0.25);
  a.add({-1}, 0.5);
  CHECK(a.size() == 2);
  CHECK(a.mass_at({1}) == doctest::Approx(0.5));
  CHECK(a.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("validation matches brute-force reachability") {
  for (const std::string name : {"w1", "w2", "w3", "figure_left", "modulated2d"}) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    const ValidationReport v = validate(s);
    CHECK(v.full_chain_irreducible == oracle::irreducible_in_box(s, 8));
    CHECK(v.rows_stochastic);
    CHECK(v.markov_irreducible);
  }
}

TEST_CASE("one-sided walk is not irreducible") {
  const ProcessSpec s = parse_spec(R"({"d":1,"p":1,"jumps":[{"from":1,"to":1,"atoms":[{"dx":[1],"prob":0.6},{"dx":[0],"prob":0.4}]}]})");
  CHECK_FALSE(oracle::irreducible_in_box(s, 6));
  CHECK_FALSE(validate(s).full_chain_irreducible);
}

TEST_CASE("sublattice walk is not irreducible") {
  const ProcessSpec s = parse_spec(R"({"d":1,"p":1,"jumps":[{"from":1,"to":1,"atoms":[{"dx":[2],"prob":0.6},{"dx":[-2],"prob":0.4}]}]})");
  CHECK_FALSE(oracle::irreducible_in_box(s, 6));
  const ValidationReport v = validate(s);
  CHECK_FALSE(v.full_chain_irreducible);
  CHECK(v.displacement_lattice_index == 2);
}

TEST_CASE("periodicity") {
  const ValidationReport per = validate(load_spec(oracle::data("periodic")));
  CHECK_FALSE(per.aperiodic);
  CHECK(per.period == 2);
  CHECK(validate(load_spec(oracle::data("w2"))).aperiodic);
}

TEST_CASE("centered process flagged") {
  const ValidationReport v = validate(load_spec(oracle::data("centered")));
  CHECK_FALSE(v.non_centered);
  CHECK(v.global_drift_norm < kDriftTol);
}

TEST_CASE("stationary distribution and drift agree with power iteration") {
  for (const std::string name : {"w1", "w2", "w3", "figure_left", "modulated2d"}) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    const MomentData m = moments(s);
    CHECK((m.pi.transpose() - oracle::stationary(s)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((m.global_drift - oracle::drift(s)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("W2 moments by hand") {
  const MomentData m = moments(load_spec(oracle::data("w2")));
  CHECK(m.pi[0] == doctest::Approx(0.5));
  CHECK(m.global_drift[0] == doctest::Approx(0.5 * 0.7 - 0.5 * 0.4));
  CHECK(m.second_moment(1, 1)(0, 0) == doctest::Approx(0.4));
}

TEST_CASE("reducible modulating chain has no stationary distribution") {
  const ProcessSpec s = parse_spec(R"({"d":1,"p":2,"jumps":[
    {"from":1,"to":1,"atoms":[{"dx":[1],"prob":0.5},{"dx":[-1],"prob":0.5}]},
    {"from":2,"to":1,"atoms":[{"dx":[0],"prob":1.0}]}]})");
  CHECK_FALSE(markov_irreducible(s));
  CHECK_THROWS_AS((void)stationary_distribution(s), PreconditionError);
}
