#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "madd/cli_io.hpp"
#include "madd/errors.hpp"
#include "madd/transforms.hpp"

using namespace madd;

namespace {
const char* const kSpecs[] = {"w1", "w2", "w3", "figure_left", "modulated2d"};
}

TEST_CASE("fourier and laplace match direct sums") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (const std::string name : kSpecs) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd th(s.dim());
      for (int k = 0; k < s.dim(); ++k) th[k] = unif(rng);
      CHECK((fourier(s, th) - oracle::fourier(s, th)).cwiseAbs().maxCoeff() < 1e-14);
      const Eigen::VectorXd c = 0.3 * th;
      CHECK((laplace(s, c) - oracle::laplace(s, c)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("convolution power matches dense stepping") {
  for (const std::string name : kSpecs) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    const int n = 7;
    const MeasureMatrix mu = convolution_power(s, n);
    for (int i = 0; i < s.states(); ++i) {
      const oracle::Law law = oracle::power(s, i, n);
      double worst = 0.0;
      for (const auto& [state, mass] : law)
        worst = std::max(worst, std::abs(mu.at(i, state.second).mass_at(LatticeVector(state.first)) - mass));
      CHECK(worst < 1e-15);
      double total = 0.0;
      for (int j = 0; j < s.states(); ++j) total += mu.at(i, j).total_mass();
      CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("fourier is a homomorphism for convolution") {
  const ProcessSpec s = load_spec(oracle::data("w2"));
  Eigen::VectorXd th(1);
  th << 1.1;
  const ComplexMatrix f = fourier(s, th);
  const ComplexMatrix f5 = f * f * f * f * f;
  CHECK((fourier(convolution_power(s, 5), th) - f5).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("convolution cap") {
  const ProcessSpec s = load_spec(oracle::data("w3"));
  ConvolutionCaps caps;
  caps.max_power_nd = 5;
  CHECK_THROWS_AS((void)convolution_power(s, 6, caps), ResourceError);
}

TEST_CASE("perron triple agrees with power iteration") {
  for (const std::string name : kSpecs) {
    CAPTURE(name);
    const ProcessSpec s = load_spec(oracle::data(name));
    Eigen::VectorXd c = Eigen::VectorXd::Constant(s.dim(), 0.2);
    const Eigen::MatrixXd l = laplace(s, c);
    const PerronTriple t = perron_triple(l);
    CHECK(t.rho == doctest::Approx(oracle::perron(l)).epsilon(1e-10));
    CHECK((l * t.right - t.rho * t.right).norm() < 1e-10);
    CHECK((t.left.transpose() * l - t.rho * t.left.transpose()).norm() < 1e-10);
    CHECK(t.left.dot(t.right) == doctest::Approx(1.0));
    CHECK(t.right.maxCoeff() == doctest::Approx(1.0));
    CHECK(t.right.minCoeff() > 0.0);
  }
}

TEST_CASE("leading decomposition reconstructs the matrix") {
  const ProcessSpec s = load_spec(oracle::data("w2"));
  Eigen::VectorXd th(1);
  th << 0.4;
  const SpectralDecomposition sd = leading_decomposition(s, th);
  const ComplexMatrix f = fourier(s, th);
  CHECK((sd.k * sd.proj + sd.rem - f).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sd.proj * sd.proj - sd.proj).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sd.proj * sd.rem).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conjugate symmetry") {
  const ProcessSpec s = load_spec(oracle::data("w3"));
  Eigen::VectorXd th(2);
  th << 0.7, -1.9;
  CHECK((fourier(s, -th) - fourier(s, th).conjugate()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("contraction away from the origin") {
  const ProcessSpec s = load_spec(oracle::data("w2"));
  for (double t : {0.5, 1.5, 3.0}) {
    Eigen::VectorXd th(1);
    th << t;
    CHECK(spectral_radius(fourier(s, th)) < 1.0);
  }
}

TEST_CASE("scan detects periodicity") {
  const ScanReport per = spectral_scan(load_spec(oracle::data("periodic")), 401);
  CHECK(std::abs(per.max_radius - 1.0) < 1e-10);
  CHECK(std::abs(std::abs(per.argmax[0]) - M_PI) < 1e-12);
  CHECK(spectral_scan(load_spec(oracle::data("w2")), 401).max_radius < 1.0 - 1e-4);
}

TEST_CASE("derivatives of the leading eigenvalue at zero") {
  for (const std::string name : {"w1", "w2", "w3"}) {
    CAPTURE(name);
    const DerivativeCheck dc = k_derivative_check(load_spec(oracle::data(name)));
    CHECK(dc.gradient_residual < 1e-6);
    CHECK(dc.hessian_residual < 1e-6);
  }
}
