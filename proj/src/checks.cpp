#include "madd/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "madd/boundary.hpp"
#include "madd/errors.hpp"
#include "madd/green.hpp"
#include "madd/sections.hpp"
#include "madd/transforms.hpp"

namespace madd {

namespace {

using Probe = std::function<double()>;

void record(std::vector<CheckResult>& out, const std::string& name, double threshold, const Probe& probe,
            bool strict = false) {
  CheckResult r;
  r.name = name;
  r.threshold = threshold;
  try {
    r.value = probe();
    r.passed = strict ? r.value < threshold : r.value <= threshold;
  } catch (const std::exception& e) {
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.passed = false;
    r.detail = e.what();
  }
  out.push_back(std::move(r));
}

Eigen::VectorXd random_theta(std::mt19937_64& rng, int d, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v[k] = dist(rng);
  return v;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

int scan_points(int d) { return d == 1 ? 401 : d == 2 ? 101 : 31; }

// Largest distance from an eigenvalue of `a` to the nearest unused eigenvalue of `b`.
double spectrum_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::VectorXcd ea = Eigen::ComplexEigenSolver<ComplexMatrix>(a, false).eigenvalues();
  const Eigen::VectorXcd eb = Eigen::ComplexEigenSolver<ComplexMatrix>(b, false).eigenvalues();
  std::vector<bool> used(static_cast<std::size_t>(eb.size()), false);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < ea.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index l = 0; l < eb.size(); ++l)
      if (!used[static_cast<std::size_t>(l)] && std::abs(ea[k] - eb[l]) < best) {
        best = std::abs(ea[k] - eb[l]);
        arg = l;
      }
    used[static_cast<std::size_t>(arg)] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<GreenTarget> agreement_targets(const ProcessSpec& spec, const Eigen::VectorXd& drift) {
  const int d = spec.dim();
  const int p = spec.states();
  std::vector<GreenTarget> out;
  const Eigen::VectorXd dir = drift.normalized();
  const std::vector<Eigen::VectorXd> points{Eigen::VectorXd::Zero(d), 3.0 * dir, -2.0 * dir,
                                            Eigen::VectorXd::Unit(d, d - 1) * 2.0, 6.0 * dir};
  int j = 0;
  for (const auto& v : points) out.push_back({nearest_lattice_point(v), j++ % p});
  return out;
}

}  // namespace

std::vector<CheckResult> run_checks(const ProcessSpec& spec, const CheckOptions& options) {
  const int d = spec.dim();
  const int p = spec.states();
  std::vector<CheckResult> out;
  std::mt19937_64 rng(options.seed);

  record(out, "validate", 0.0, [&] {
    const ValidationReport v = validate(spec);
    return static_cast<double>(!v.rows_stochastic + !v.markov_irreducible + !v.full_chain_irreducible + !v.aperiodic +
                               !v.non_centered);
  });
  record(out, "row_stochastic", kStructuralTol, [&] {
    return (spec.markov_matrix().rowwise().sum().array() - 1.0).abs().maxCoeff();
  });
  record(out, "stationary_invariance", kStructuralTol, [&] {
    const Eigen::RowVectorXd pi = stationary_distribution(spec);
    if (pi.minCoeff() <= 0.0) throw NumericError("stationary vector is not positive");
    return (pi * spec.markov_matrix() - pi).cwiseAbs().maxCoeff();
  });

  const DerivativeCheck kd = [&] {
    try {
      return k_derivative_check(spec);
    } catch (const std::exception&) {
      return DerivativeCheck{{}, {}, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
  }();
  record(out, "k_gradient_at_0", 1e-6, [&] { return kd.gradient_residual; });
  record(out, "k_hessian_at_0", 1e-6, [&] { return kd.hessian_residual; });
  record(out, "rho_gradient_at_0", 1e-6, [&] {
    return (rho_eval(spec, Eigen::VectorXd::Zero(d)).grad - moments(spec).global_drift).cwiseAbs().maxCoeff();
  });
  record(out, "rho_hessian_at_0", 1e-6, [&] {
    return (rho_eval(spec, Eigen::VectorXd::Zero(d)).hess - energy_matrix(spec).sigma).cwiseAbs().maxCoeff();
  });
  record(
      out, "spectral_scan", 1.0, [&] { return spectral_scan(spec, scan_points(d)).max_radius; }, true);

  record(out, "fourier_homomorphism", 1e-9, [&] {
    double worst = 0.0;
    for (int n = 0; n <= 6; ++n) {
      const MeasureMatrix power = convolution_power(spec, n);
      for (int s = 0; s < 3; ++s) {
        const Eigen::VectorXd theta = random_theta(rng, d, std::numbers::pi);
        ComplexMatrix f = ComplexMatrix::Identity(p, p);
        for (int k = 0; k < n; ++k) f = f * fourier(spec, theta);
        worst = std::max(worst, max_abs(fourier(power, theta) - f));
      }
    }
    return worst;
  });
  record(out, "conjugate_symmetry", 1e-12, [&] {
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      const Eigen::VectorXd theta = random_theta(rng, d, std::numbers::pi);
      worst = std::max(worst, max_abs(fourier(spec, -theta) - fourier(spec, theta).conjugate()));
    }
    return worst;
  });
  record(out, "contraction", 1.0 + 1e-12, [&] {
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const ComplexMatrix f = fourier(spec, random_theta(rng, d, std::numbers::pi));
      worst = std::max(worst, f.cwiseAbs().rowwise().sum().maxCoeff());
    }
    return worst;
  });
  record(out, "decomposition", 1e-10, [&] {
    double worst = 0.0;
    for (int s = 0; s < 4; ++s) {
      const Eigen::VectorXd theta = s == 0 ? Eigen::VectorXd::Zero(d) : random_theta(rng, d, 0.05);
      const ComplexMatrix f = fourier(spec, theta);
      const SpectralDecomposition sd = leading_decomposition(f);
      worst = std::max(worst, max_abs(f - sd.k * sd.proj - sd.rem));
      worst = std::max(worst, max_abs(sd.proj * sd.proj - sd.proj));
      worst = std::max(worst, max_abs(sd.proj * sd.rem));
      worst = std::max(worst, max_abs(sd.rem * sd.proj));
      if (spectral_radius(sd.rem) >= std::abs(sd.k)) return std::numeric_limits<double>::infinity();
      if (s == 0) {
        const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(p);
        const Eigen::RowVectorXcd pi = stationary_distribution(spec).cast<Complex>();
        worst = std::max(worst, (sd.proj * ones - ones).cwiseAbs().maxCoeff());
        worst = std::max(worst, (pi * sd.proj - pi).cwiseAbs().maxCoeff());
      }
    }
    return worst;
  });
  record(out, "section_spectrum", 1e-9, [&] {
    double worst = 0.0;
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    for (int s = 0; s < 5; ++s) {
      SectionMatrix g{Eigen::MatrixXd(p, d)};
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < d; ++b) g.g(a, b) = unit(rng);
      const Eigen::VectorXd theta = random_theta(rng, d, std::numbers::pi);
      worst = std::max(worst, spectrum_distance(fourier(spec, theta), fourier(apply_section(spec, g), theta)));
    }
    return worst;
  });
  record(out, "appropriate_section", 1e-10, [&] {
    const MomentData mom = moments(apply_section(spec, appropriate_section(spec)));
    double worst = 0.0;
    for (int i = 0; i < p; ++i) {
      Eigen::VectorXd row = -mom.global_drift;
      for (int j = 0; j < p; ++j) row += mom.drift(i, j);
      worst = std::max(worst, row.cwiseAbs().maxCoeff());
    }
    return worst;
  });
  record(out, "convexity", 1e-10, [&] {
    const Eigen::VectorXd center = rho_minimizer(spec);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample = [&] {
      Eigen::VectorXd w = random_theta(rng, d, 1.0);
      if (w.norm() == 0.0) w = Eigen::VectorXd::Unit(d, 0);
      const Eigen::VectorXd edge = ray_to_boundary(spec, center, w.normalized());
      return Eigen::VectorXd(center + unit(rng) * (edge - center));
    };
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 100; ++s) {
      const Eigen::VectorXd a = sample();
      const Eigen::VectorXd b = sample();
      const double t = unit(rng);
      const double lhs = spectral_radius_at(spec, t * a + (1 - t) * b);
      worst = std::max(worst, lhs - std::max(spectral_radius_at(spec, a), spectral_radius_at(spec, b)));
    }
    return worst;
  });

  BoundaryTrace trace;
  bool have_trace = false;
  record(out, "direction_round_trip", 1e-8, [&] {
    trace = boundary_trace(spec, options.directions);
    have_trace = true;
    return trace.max_direction_residual;
  });
  record(out, "exponential_rate_positive", 0.0, [&] {
    if (!have_trace) throw PreconditionError("boundary trace unavailable");
    const Eigen::VectorXd mhat = moments(spec).global_drift.normalized();
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& bp : trace.points) {
      if (bp.u.dot(mhat) > 1.0 - 1e-12) continue;
      worst = std::max(worst, -bp.c.dot(bp.u));
    }
    return worst;
  }, true);
  record(out, "doob_row_mass", kStructuralTol, [&] {
    if (!have_trace) throw PreconditionError("boundary trace unavailable");
    double worst = 0.0;
    for (const auto& bp : trace.points) {
      const DoobTransform doob = doob_transform(spec, bp.c);
      worst = std::max(worst, (doob.transformed.markov_matrix().rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    return worst;
  });
  record(out, "doob_drift_gradient", 1e-6, [&] {
    if (!have_trace) throw PreconditionError("boundary trace unavailable");
    double worst = 0.0;
    for (const auto& bp : trace.points)
      worst = std::max(worst, (bp.m_c - rho_eval(spec, bp.c).grad).cwiseAbs().maxCoeff());
    return worst;
  });
  record(out, "doob_energy_positive", 0.0, [&] {
    if (!have_trace) throw PreconditionError("boundary trace unavailable");
    for (const auto& bp : trace.points) (void)energy_matrix(doob_transform(spec, bp.c).transformed);
    return 0.0;
  });

  const Eigen::VectorXd drift = moments(spec).global_drift;
  SeriesOptions series;
  series.horizon = 5000;
  series.tolerance = 1e-13;
  record(out, "doob_conjugation", 1e-6, [&] {
    const Eigen::VectorXd c = boundary_point(spec, -drift.normalized()).c;
    double worst = 0.0;
    for (int i = 0; i < p; ++i) worst = std::max(worst, doob_conjugation_residual(spec, c, i, agreement_targets(spec, drift), series));
    return worst;
  });
  record(out, "green_origin_at_least_one", 0.0, [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i)
      worst = std::max(worst, 1.0 - green_series(spec, i, LatticeVector::zero(static_cast<std::size_t>(d)), i, series).value);
    return worst;
  });
  record(out, "translation_invariance", 1e-12, [&] {
    const auto targets = agreement_targets(spec, drift);
    LatticeVector z = nearest_lattice_point(Eigen::VectorXd::Constant(d, 3.0));
    std::vector<GreenTarget> shifted;
    for (const auto& t : targets) shifted.push_back({t.x + z, t.j});
    const auto a = green_series_batch(spec, 0, targets, series);
    const auto b = green_series_batch(spec, 0, shifted, series, z);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k].value - b[k].value));
    return worst;
  });
  record(out, "series_vs_resolvent", 1.0, [&] {
    const auto targets = agreement_targets(spec, drift);
    const auto s = green_series_batch(spec, 0, targets, series);
    const auto r = green_resolvent_batch(spec, 0, targets);
    double worst = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k)
      worst = std::max(worst, std::abs(s[k].value - r[k].value) / (s[k].error + r[k].error));
    return worst;
  });
  if (options.mc_paths > 0) {
    record(out, "series_vs_monte_carlo", 3.0, [&] {
      const auto targets = agreement_targets(spec, drift);
      const auto s = green_series_batch(spec, 0, targets, series);
      McOptions mc;
      mc.paths = options.mc_paths;
      mc.horizon = 1000;
      mc.seed = options.seed;
      const auto m = green_mc_batch(spec, 0, targets, mc);
      double worst = 0.0;
      for (std::size_t k = 0; k < targets.size(); ++k) {
        const double diff = std::abs(s[k].value - m[k].value);
        if (m[k].error == 0.0) {
          if (diff > s[k].error) return std::numeric_limits<double>::infinity();
          continue;
        }
        worst = std::max(worst, std::max(0.0, diff - s[k].error) / m[k].error);
      }
      return worst;
    });
  }
  return out;
}

}  // namespace madd
