// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "madd/boundary.hpp"
#include "madd/cli_io.hpp"
#include "madd/green.hpp"
#include "madd/sections.hpp"
#include "madd/transforms.hpp"

using namespace madd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string data(const std::string& name) { return std::string(MADD_TEST_DATA) + "/" + name + ".json"; }

std::string num(double v) { return format_real(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::string> kMain{"w1", "w2", "w3"};

Outcome criterion1() {
  Outcome o;
  for (const auto& name : kMain) {
    const auto t0 = std::chrono::steady_clock::now();
    const DerivativeCheck dc = k_derivative_check(load_spec(data(name)));
    const double t = seconds_since(t0);
    o.require(dc.gradient_residual < 1e-6, name + " grad residual " + num(dc.gradient_residual));
    o.require(dc.hessian_residual < 1e-6, name + " hessian residual " + num(dc.hessian_residual));
    o.require(t < 1.0, name + " took " + num(t) + " s");
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& name : kMain) {
    const ProcessSpec s = load_spec(data(name));
    const int d = s.dim();
    const RhoEvaluation e = rho_eval(s, Eigen::VectorXd::Zero(d));
    const MomentData m = moments(s);
    const Eigen::MatrixXd sigma = energy_matrix(s).sigma;
    const double gr = (e.grad - m.global_drift).cwiseAbs().maxCoeff();
    const double hr = (e.hess - sigma).cwiseAbs().maxCoeff();
    o.require(gr < 1e-6, name + " grad rho residual " + num(gr));
    o.require(hr < 1e-6, name + " hessian rho residual " + num(hr));
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd a(d), b(d);
      for (int q = 0; q < d; ++q) {
        a[q] = unif(rng);
        b[q] = unif(rng);
      }
      const double lam = 0.5 * (unif(rng) + 1.0);
      const double mid = spectral_radius_at(s, lam * a + (1 - lam) * b);
      const double chord = lam * spectral_radius_at(s, a) + (1 - lam) * spectral_radius_at(s, b);
      violations += mid > chord + 1e-12;
    }
    o.require(violations == 0, name + " convexity violations " + std::to_string(violations));
  }
  const double t = seconds_since(t0);
  o.require(t < 5.0, "took " + num(t) + " s");
  return o;
}

Outcome criterion3() {
  Outcome o;
  for (const std::string name : {"w1", "w2"}) {
    const ScanReport r = spectral_scan(load_spec(data(name)), 401);
    o.require(r.max_radius < 1.0 - 1e-4, name + " scan max " + num(r.max_radius));
  }
  const ScanReport per = spectral_scan(load_spec(data("periodic")), 401);
  o.require(std::abs(per.max_radius - 1.0) < 1e-10, "periodic max " + num(per.max_radius));
  o.require(std::abs(std::abs(per.argmax[0]) - M_PI) < 1e-10, "periodic argmax " + num(per.argmax[0]));
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& name : kMain) {
    const ProcessSpec s = load_spec(data(name));
    const Eigen::VectorXd mhat = moments(s).global_drift.normalized();
    double worst = 0.0;
    int bad = 0;
    for (const auto& u : sample_directions(s.dim(), 64)) {
      const BoundaryPoint b = boundary_point(s, u);
      const RhoEvaluation e = rho_eval(s, b.c);
      worst = std::max(worst, (e.grad.normalized() - u).norm());
      if ((u - mhat).norm() > 1e-9) bad += !(b.c.dot(u) > 0.0);
    }
    o.require(worst < 1e-8, name + " direction residual " + num(worst));
    o.require(bad == 0, name + " non-positive decay rates " + std::to_string(bad));
  }
  const double t = seconds_since(t0);
  o.require(t < 30.0, "took " + num(t) + " s");
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (const auto& name : kMain) {
    const ProcessSpec s = load_spec(data(name));
    double rows = 0.0, drift = 0.0, min_eig = INFINITY;
    for (const auto& u : sample_directions(s.dim(), 16)) {
      const BoundaryPoint b = boundary_point(s, u);
      const DoobTransform t = doob_transform(s, b.c);
      rows = std::max(rows, (t.transformed.markov_matrix().rowwise().sum().array() - 1.0).abs().maxCoeff());
      drift = std::max(drift, (moments(t.transformed).global_drift - rho_eval(s, b.c).grad).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd sc = energy_matrix(t.transformed).sigma;
      min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sc).eigenvalues().minCoeff());
    }
    o.require(rows < 1e-12, name + " row sum residual " + num(rows));
    o.require(drift < 1e-6, name + " drift residual " + num(drift));
    o.require(min_eig > 0.0, name + " sigma_c min eigenvalue " + num(min_eig));
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  for (const std::string name : {"w1", "w2"}) {
    const ProcessSpec s = load_spec(data(name));
    SeriesOptions so;
    so.horizon = 2000;
    for (double dir : {-1.0, 1.0}) {
      Eigen::VectorXd u(1);
      u << dir;
      const Eigen::VectorXd c = boundary_point(s, u).c;
      for (int i = 0; i < s.states(); ++i) {
        std::vector<GreenTarget> targets;
        for (std::int64_t x = -10; x <= 10; ++x)
          for (int j = 0; j < s.states(); ++j) targets.push_back({{x}, j});
        const double r = doob_conjugation_residual(s, c, i, targets, so);
        o.require(r < 1e-6, name + " residual " + num(r) + " at c=" + num(c[0]));
      }
    }
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  const ProcessSpec s = load_spec(data("w1"));
  auto exact = [](std::int64_t x) { return x >= 0 ? 10.0 / 3.0 : 10.0 / 3.0 * std::pow(0.4, static_cast<double>(-x)); };
  std::vector<GreenTarget> targets;
  for (std::int64_t x = -6; x <= 10; ++x) targets.push_back({{x}, 0});

  auto t0 = std::chrono::steady_clock::now();
  SeriesOptions so;
  so.horizon = 2000;
  const auto series = green_series_batch(s, 0, targets, so);
  const double ts = seconds_since(t0);
  const auto resolvent = green_resolvent_batch(s, 0, targets);
  t0 = std::chrono::steady_clock::now();
  McOptions mo;
  mo.paths = 100000;
  const auto mc = green_mc_batch(s, 0, targets, mo);
  const double tm = seconds_since(t0);

  for (std::size_t k = 0; k < targets.size(); ++k) {
    const std::int64_t x = targets[k].x[0];
    const double g = exact(x);
    const std::string at = " at x=" + std::to_string(x);
    o.require(std::abs(series[k].value - g) < 1e-4, "series " + num(series[k].value) + at);
    o.require(std::abs(resolvent[k].value - g) < 1e-3, "resolvent " + num(resolvent[k].value) + at);
    o.require(std::abs(mc[k].value - g) <= 3.0 * mc[k].error,
              "mc " + num(mc[k].value) + " se " + num(mc[k].error) + at);
  }
  o.require(ts < 1.0, "series took " + num(ts) + " s");
  o.require(tm < 30.0, "mc took " + num(tm) + " s");
  return o;
}

Outcome criterion8() {
  Outcome o;
  auto probe = [&](const std::string& name, const std::vector<std::int64_t>& xs, double lo, double hi) {
    const ProcessSpec s = load_spec(data(name));
    SeriesOptions so;
    so.horizon = 5000;
    so.prune = 0.0;
    for (int i = 0; i < s.states(); ++i)
      for (int j = 0; j < s.states(); ++j)
        for (std::int64_t x : xs) {
          const double g = green_series(s, i, {x}, j, so).value;
          const double a = asymptotic_green(s, i, {x}, j);
          const double ratio = g / a;
          o.require(ratio >= lo && ratio <= hi, name + " ratio " + num(ratio) + " at x=" + std::to_string(x) +
                                                    " i=" + std::to_string(i + 1) + " j=" + std::to_string(j + 1));
        }
  };
  probe("w1", {-40, -20, -10, 10, 20, 40}, 0.999, 1.001);
  probe("w2", {-20, -10, 10, 20}, 0.98, 1.02);
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ProcessSpec s = load_spec(data("w3"));
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  const std::vector<double> radii{20.0, 40.0};
  std::vector<GreenTarget> targets;
  for (double r : radii) targets.push_back({nearest_lattice_point(r * u), 0});

  ResolventOptions ro;
  ro.grid = 512;
  const auto res = green_resolvent_batch(s, 0, targets, ro);
  McOptions mo;
  mo.paths = 1000000;
  mo.horizon = 600;
  const auto mc = green_mc_batch(s, 0, targets, mo);

  AsymptoticOptions def;
  AsymptoticOptions printed;
  printed.m_exponent = printed_m_exponent(2);
  const double expected_factor = std::pow(0.2, default_m_exponent(2) - printed_m_exponent(2));
  std::vector<double> ratios;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const std::string at = " at r=" + num(radii[k]);
    const double diff = std::abs(res[k].value - mc[k].value);
    o.require(diff <= 3.0 * mc[k].error + res[k].error,
              "resolvent " + num(res[k].value) + " vs mc " + num(mc[k].value) + at);
    const double ratio = res[k].value / asymptotic_green(s, 0, targets[k].x, 0, def);
    const double ratio_printed = res[k].value / asymptotic_green(s, 0, targets[k].x, 0, printed);
    ratios.push_back(ratio);
    o.require(ratio >= 0.95 && ratio <= 1.05, "ratio " + num(ratio) + at);
    o.require(!(ratio_printed >= 0.95 && ratio_printed <= 1.05), "printed exponent ratio inside bracket" + at);
    o.require(std::abs(ratio_printed / ratio - expected_factor) < 1e-6 * expected_factor,
              "exponent factor " + num(ratio_printed / ratio));
  }
  o.require(std::abs(ratios[1] - 1.0) < std::abs(ratios[0] - 1.0),
            "ratio does not approach 1: " + num(ratios[0]) + " -> " + num(ratios[1]));
  const double t = seconds_since(t0);
  o.require(t < 300.0, "took " + num(t) + " s");
  if (o.pass) o.detail = "ratios " + num(ratios[0]) + ", " + num(ratios[1]);
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::mt19937_64 rng(10);
  for (const auto& name : kMain) {
    const ProcessSpec s = load_spec(data(name));
    const int d = s.dim();
    std::uniform_int_distribution<int> layer(0, s.states() - 1);
    std::uniform_int_distribution<std::int64_t> coord(-12, 12);
    int bad_res = 0, bad_mc = 0;
    for (int k = 0; k < 20; ++k) {
      const int i = layer(rng), j = layer(rng);
      LatticeVector x;
      do {
        x.coords.assign(static_cast<std::size_t>(d), 0);
        for (auto& v : x.coords) v = coord(rng);
      } while (x.norm() > 12.0);
      SeriesOptions so;
      so.horizon = 5000;
      so.tolerance = 1e-13;
      const GreenEstimate se = green_series(s, i, x, j, so);
      const GreenEstimate re = green_resolvent(s, i, x, j);
      McOptions mo;
      mo.paths = 100000;
      mo.horizon = 1000;
      mo.seed = 1000 + static_cast<std::uint64_t>(k);
      const GreenEstimate me = green_mc(s, i, x, j, mo);
      bad_res += std::abs(se.value - re.value) > se.error + re.error;
      bad_mc += std::abs(se.value - me.value) > 3.0 * me.error;
    }
    o.require(bad_res == 0, name + " series/resolvent disagreements " + std::to_string(bad_res));
    o.require(bad_mc == 0, name + " series/mc disagreements " + std::to_string(bad_mc));
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    try {
      out = criteria[k]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failed += !out.pass;
    std::printf("criterion %zu: %s%s%s\n", k + 1, out.pass ? "PASS" : "FAIL", out.detail.empty() ? "" : "  ",
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
