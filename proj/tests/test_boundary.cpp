#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "madd/boundary.hpp"
#include "madd/cli_io.hpp"
#include "madd/errors.hpp"

using namespace madd;

TEST_CASE("spectral radius agrees with power iteration") {
  const ProcessSpec s = load_spec(oracle::data("w2"));
  for (double c : {-1.0, -0.3, 0.0, 0.4}) {
    Eigen::VectorXd v(1);
    v << c;
    CHECK(spectral_radius_at(s, v) == doctest::Approx(oracle::perron(oracle::laplace(s, v))).epsilon(1e-10));
  }
}

TEST_CASE("rho derivatives at the origin") {
  for (const std::string name : {"w1", "w2", "w3"}) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    const RhoEvaluation e = rho_eval(s, Eigen::VectorXd::Zero(s.dim()));
    CHECK(e.rho == doctest::Approx(1.0));
    CHECK((e.grad - oracle::drift(s)).norm() < 1e-6);
  }
}

TEST_CASE("W1 boundary is two points") {
  const ProcessSpec s = load_spec(oracle::data("w1"));
  Eigen::VectorXd u(1);
  u << -1.0;
  const BoundaryPoint b = boundary_point(s, u);
  CHECK(b.c[0] == doctest::Approx(std::log(0.4)).epsilon(1e-10));
  u << 1.0;
  CHECK(std::abs(boundary_point(s, u).c[0]) < 1e-12);
}

TEST_CASE("W3 boundary point solves the closed-form gradient condition") {
  const ProcessSpec s = load_spec(oracle::data("w3"));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 12; ++t) {
    Eigen::VectorXd u(2);
    u << n01(rng), n01(rng);
    u.normalize();
    const BoundaryPoint b = boundary_point(s, u);
    const double a = b.c[0], c2 = b.c[1];
    const double rho = 0.4 * std::exp(a) + 0.2 * std::exp(-a) + 0.15 * std::exp(c2) + 0.15 * std::exp(-c2) + 0.1;
    Eigen::VectorXd grad(2);
    grad << 0.4 * std::exp(a) - 0.2 * std::exp(-a), 0.15 * std::exp(c2) - 0.15 * std::exp(-c2);
    CHECK(std::abs(rho - 1.0) < 1e-10);
    CHECK((grad.normalized() - u).norm() < 1e-8);
    CHECK((b.m_c - grad).norm() < 1e-8);
  }
}

TEST_CASE("drift direction maps to the origin and other directions decay") {
  for (const std::string name : {"w2", "w3", "modulated2d"}) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    const Eigen::VectorXd m = oracle::drift(s);
    CHECK(boundary_point(s, m.normalized()).c.norm() < 1e-12);
    for (const auto& u : sample_directions(s.dim(), 16)) {
      const BoundaryPoint b = boundary_point(s, u);
      CHECK(b.direction_residual < 1e-8);
      if ((u - m.normalized()).norm() > 1e-6) CHECK(b.c.dot(u) > 0.0);
    }
  }
}

TEST_CASE("Doob transform rows and drift") {
  for (const std::string name : {"w2", "w3", "modulated2d"}) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    for (const auto& u : sample_directions(s.dim(), 6)) {
      const BoundaryPoint b = boundary_point(s, u);
      const DoobTransform t = doob_transform(s, b.c);
      const Eigen::MatrixXd p = t.transformed.markov_matrix();
      CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
      CHECK((oracle::drift(t.transformed) - rho_eval(s, b.c).grad).norm() < 1e-6);
    }
  }
}

TEST_CASE("Doob transform off the boundary is rejected") {
  const ProcessSpec s = load_spec(oracle::data("w1"));
  Eigen::VectorXd c(1);
  c << 0.5;
  CHECK_THROWS_AS((void)doob_transform(s, c), PreconditionError);
}

TEST_CASE("centered process has no boundary map") {
  const ProcessSpec s = load_spec(oracle::data("centered"));
  Eigen::VectorXd u(1);
  u << 1.0;
  CHECK_THROWS_AS((void)boundary_point(s, u), PreconditionError);
}

TEST_CASE("non-unit direction rejected") {
  const ProcessSpec s = load_spec(oracle::data("w3"));
  Eigen::VectorXd u(2);
  u << 1.0, 1.0;
  CHECK_THROWS_AS((void)boundary_point(s, u), PreconditionError);
}

TEST_CASE("boundary trace is continuous") {
  const BoundaryTrace tr = boundary_trace(load_spec(oracle::data("w3")), 64);
  CHECK(tr.points.size() == 64);
  CHECK(tr.max_direction_residual < 1e-8);
  CHECK(tr.max_step < 0.5);
}
