#include "madd/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "finite_difference.hpp"
#include "madd/errors.hpp"
#include "madd/transforms.hpp"

namespace madd {

namespace {

constexpr double kNewtonTol = 1e-11;
constexpr double kBoundaryRhoTol = 1e-10;
constexpr double kBoundaryDirectionTol = 1e-8;

struct KktState {
  Eigen::VectorXd c;
  double lambda = 0.0;
};

Eigen::VectorXd kkt_residual(const RhoEvaluation& ev, const Eigen::VectorXd& u, double lambda) {
  const Eigen::Index d = u.size();
  Eigen::VectorXd f(d + 1);
  f.head(d) = ev.grad - lambda * u;
  f[d] = ev.rho - 1.0;
  return f;
}

// Damped Newton on grad rho(c) = lambda u, rho(c) = 1 with backtracking on
// the residual norm.
bool newton_kkt(const ProcessSpec& spec, const Eigen::VectorXd& u, KktState& s, int max_iterations, int& iterations) {
  const Eigen::Index d = u.size();
  RhoEvaluation ev = rho_eval(spec, s.c);
  Eigen::VectorXd f = kkt_residual(ev, u, s.lambda);
  for (int it = 0; it < max_iterations; ++it) {
    ++iterations;
    const double norm = f.norm();
    if (norm < kNewtonTol) return true;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d + 1, d + 1);
    jac.topLeftCorner(d, d) = ev.hess;
    jac.topRightCorner(d, 1) = -u;
    jac.bottomLeftCorner(1, d) = ev.grad.transpose();
    const Eigen::VectorXd step = jac.fullPivLu().solve(-f);
    if (!step.allFinite()) return false;

    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
      KktState trial{s.c + alpha * step.head(d), s.lambda + alpha * step[d]};
      if (trial.lambda <= 0.0) continue;
      RhoEvaluation trial_ev = rho_eval(spec, trial.c);
      Eigen::VectorXd trial_f = kkt_residual(trial_ev, u, trial.lambda);
      if (trial_f.norm() < (1.0 - 1e-4 * alpha) * norm) {
        s = std::move(trial);
        ev = std::move(trial_ev);
        f = std::move(trial_f);
        accepted = true;
        break;
      }
    }
    if (!accepted) return norm < 1e-9;
  }
  return f.norm() < 1e-9;
}

Eigen::VectorXd slerp(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t) {
  const double cosang = std::clamp(a.dot(b), -1.0, 1.0);
  const double ang = std::acos(cosang);
  if (ang < 1e-12) return b;
  const Eigen::VectorXd v = (std::sin((1 - t) * ang) * a + std::sin(t * ang) * b) / std::sin(ang);
  return v.normalized();
}

// Continuation in the target direction from a point whose normal is known.
bool continuation(const ProcessSpec& spec, const Eigen::VectorXd& u_start, const Eigen::VectorXd& u_target,
                  KktState& s, int max_iterations, int& iterations) {
  double t = 0.0;
  double dt = 0.25;
  while (t < 1.0) {
    const double next = std::min(1.0, t + dt);
    KktState trial = s;
    int it = 0;
    if (newton_kkt(spec, slerp(u_start, u_target, next), trial, 30, it)) {
      s = std::move(trial);
      t = next;
      dt = std::min(0.5, dt * 1.5);
    } else {
      dt *= 0.5;
      if (dt < 1e-4) return false;
    }
    iterations += it;
    if (iterations > 50 * max_iterations) return false;
  }
  return true;
}

}  // namespace

double spectral_radius_at(const ProcessSpec& spec, const Eigen::VectorXd& c) { return perron_root(laplace(spec, c)); }

RhoEvaluation rho_eval(const ProcessSpec& spec, const Eigen::VectorXd& c) {
  auto rho = [&](const Eigen::VectorXd& x) { return spectral_radius_at(spec, x); };
  RhoEvaluation ev;
  ev.c = c;
  ev.rho = rho(c);
  ev.grad = detail::gradient<double>(rho, c);
  ev.hess = detail::hessian<double>(rho, c);
  return ev;
}

Eigen::VectorXd rho_minimizer(const ProcessSpec& spec) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(spec.dim());
  for (int it = 0; it < 200; ++it) {
    const RhoEvaluation ev = rho_eval(spec, c);
    if (ev.grad.norm() < 1e-11) break;
    Eigen::LLT<Eigen::MatrixXd> llt(ev.hess);
    const Eigen::VectorXd step = llt.info() == Eigen::Success ? Eigen::VectorXd(llt.solve(-ev.grad)) : Eigen::VectorXd(-ev.grad);
    bool moved = false;
    for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
      const Eigen::VectorXd trial = c + alpha * step;
      if (spectral_radius_at(spec, trial) < ev.rho) {
        c = trial;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return c;
}

Eigen::VectorXd ray_to_boundary(const ProcessSpec& spec, const Eigen::VectorXd& interior, const Eigen::VectorXd& w) {
  const double inner = spectral_radius_at(spec, interior);
  if (!(inner < 1.0)) throw PreconditionError("ray search needs a point strictly inside {rho < 1}");
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (spectral_radius_at(spec, interior + hi * w) < 1.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) throw NumericError("rho does not grow along the ray");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (spectral_radius_at(spec, interior + mid * w) < 1.0) lo = mid;
    else hi = mid;
  }
  const Eigen::VectorXd a = interior + lo * w;
  const Eigen::VectorXd b = interior + hi * w;
  return std::abs(spectral_radius_at(spec, a) - 1.0) <= std::abs(spectral_radius_at(spec, b) - 1.0) ? a : b;
}

DoobTransform doob_transform(const ProcessSpec& spec, const Eigen::VectorXd& c) {
  const PerronTriple t = perron_triple(laplace(spec, c));
  if (!(std::abs(t.rho - 1.0) < 1e-8)) throw PreconditionError("Doob transform needs rho(c) = 1 (c on the boundary)");
  const int p = spec.states();
  std::vector<JumpMeasure> jumps(static_cast<std::size_t>(p * p));
  for (int i = 0; i < p; ++i) {
    double row = 0.0;
    for (int j = 0; j < p; ++j)
      for (const auto& [x, mass] : spec.jump(i, j).atoms())
        row += t.right[j] * std::exp(x.to_real().dot(c)) * mass;
    // row equals rho(c) * phi_i up to rounding
    for (int j = 0; j < p; ++j) {
      auto& out = jumps[static_cast<std::size_t>(i * p + j)];
      for (const auto& [x, mass] : spec.jump(i, j).atoms())
        out.add(x, t.right[j] * std::exp(x.to_real().dot(c)) * mass / row);
    }
  }
  return DoobTransform{c, t.right, ProcessSpec(spec.dim(), p, std::move(jumps))};
}

BoundaryPoint boundary_point(const ProcessSpec& spec, const Eigen::VectorXd& u, const BoundaryOptions& options) {
  if (u.size() != spec.dim()) throw PreconditionError("direction has the wrong dimension");
  if (std::abs(u.norm() - 1.0) > 1e-12) throw PreconditionError("direction must be a unit vector");
  const MomentData mom = moments(spec);
  if (mom.global_drift.norm() <= kDriftTol)
    throw PreconditionError("non-centering assumption violated: the global drift is zero");

  BoundaryPoint bp;
  bp.u = u;
  const Eigen::VectorXd drift_dir = mom.global_drift.normalized();
  if ((drift_dir - u).norm() < 1e-14) {
    bp.c = Eigen::VectorXd::Zero(spec.dim());
  } else {
    const Eigen::VectorXd interior = rho_minimizer(spec);
    KktState s;
    s.c = ray_to_boundary(spec, interior, u);
    const RhoEvaluation start = rho_eval(spec, s.c);
    s.lambda = start.grad.norm();
    KktState warm = s;
    bool ok = newton_kkt(spec, u, s, options.max_iterations, bp.iterations);
    if (!ok) {
      s = warm;
      const Eigen::VectorXd u0 = start.grad.normalized();
      ok = continuation(spec, u0, u, s, options.max_iterations, bp.iterations);
      if (!ok && spec.dim() >= 2 && u0.dot(u) < -0.9) {
        // Near-antipodal: route through a perpendicular direction.
        Eigen::VectorXd perp = Eigen::VectorXd::Unit(spec.dim(), 0) - u0[0] * u0;
        if (perp.norm() < 1e-6) perp = Eigen::VectorXd::Unit(spec.dim(), 1) - u0[1] * u0;
        perp.normalize();
        s = warm;
        ok = continuation(spec, u0, perp, s, options.max_iterations, bp.iterations) &&
             continuation(spec, perp, u, s, options.max_iterations, bp.iterations);
      }
    }
    if (!ok) throw NumericError("boundary solver did not converge; last iterate rho = " +
                                std::to_string(spectral_radius_at(spec, s.c)));
    // Snap onto rho = 1 along the ray from the interior point.
    bp.c = ray_to_boundary(spec, interior, s.c - interior);
  }

  const DoobTransform doob = doob_transform(spec, bp.c);
  bp.m_c = moments(doob.transformed).global_drift;
  bp.rho_residual = std::abs(spectral_radius_at(spec, bp.c) - 1.0);
  bp.direction_residual = (bp.m_c.normalized() - u).norm();
  if (bp.rho_residual > kBoundaryRhoTol || bp.direction_residual > kBoundaryDirectionTol)
    throw NumericError("boundary point residuals above tolerance");
  return bp;
}

std::vector<Eigen::VectorXd> sample_directions(int d, int n) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(n));
  if (d == 1) {
    for (int k = 0; k < n; ++k) out.push_back(Eigen::VectorXd::Constant(1, k % 2 == 0 ? 1.0 : -1.0));
  } else if (d == 2) {
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n;
      Eigen::VectorXd v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
  } else if (d == 3) {
    // golden-angle spiral
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Eigen::VectorXd v(3);
      v << r * std::cos(golden * k), r * std::sin(golden * k), z;
      out.push_back(v);
    }
  } else {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd v(d);
      for (int c = 0; c < d; ++c) v[c] = normal(rng);
      out.push_back(v.normalized());
    }
  }
  return out;
}

BoundaryTrace boundary_trace(const ProcessSpec& spec, int n_directions, const BoundaryOptions& options) {
  BoundaryTrace trace;
  for (const auto& u : sample_directions(spec.dim(), n_directions)) {
    trace.points.push_back(boundary_point(spec, u, options));
    const auto& bp = trace.points.back();
    trace.max_direction_residual = std::max(trace.max_direction_residual, bp.direction_residual);
    if (trace.points.size() > 1)
      trace.max_step = std::max(trace.max_step, (bp.c - trace.points[trace.points.size() - 2].c).norm());
  }
  return trace;
}

}  // namespace madd
