#include "madd/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "finite_difference.hpp"
#include "lattice_field.hpp"
#include "madd/errors.hpp"
#include "madd/sections.hpp"

namespace madd {

namespace {

double dot(const LatticeVector& x, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.dim(); ++k) s += static_cast<double>(x[k]) * v[static_cast<Eigen::Index>(k)];
  return s;
}

Complex fourier_entry(const JumpMeasure& mu, const Eigen::VectorXd& theta) {
  Complex s{0.0, 0.0};
  for (const auto& [x, mass] : mu.atoms()) s += mass * std::polar(1.0, dot(x, theta));
  return s;
}

bool graph_irreducible(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  auto sweep = [&](bool transpose) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const Eigen::Index v = stack.back();
      stack.pop_back();
      for (Eigen::Index w = 0; w < n; ++w) {
        const double e = transpose ? m(w, v) : m(v, w);
        if (e > 0.0 && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          stack.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return sweep(false) && sweep(true);
}

// Eigenvector of the eigenvalue with largest real part, made real and positive.
Eigen::VectorXd positive_eigenvector(const Eigen::MatrixXd& m, double& root) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, true);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed on nonnegative matrix");
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < m.rows(); ++k)
    if (solver.eigenvalues()[k].real() > solver.eigenvalues()[best].real()) best = k;
  root = solver.eigenvalues()[best].real();
  Eigen::VectorXd v = solver.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  return v;
}

}  // namespace

ComplexMatrix fourier(const ProcessSpec& spec, const Eigen::VectorXd& theta) {
  const int p = spec.states();
  ComplexMatrix f(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) f(i, j) = fourier_entry(spec.jump(i, j), theta);
  return f;
}

Eigen::MatrixXd laplace(const ProcessSpec& spec, const Eigen::VectorXd& c) {
  const int p = spec.states();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (const auto& [x, mass] : spec.jump(i, j).atoms()) l(i, j) += mass * std::exp(dot(x, c));
  return l;
}

ComplexMatrix laplace_complex(const ProcessSpec& spec, const Eigen::VectorXd& c, const Eigen::VectorXd& theta) {
  const int p = spec.states();
  ComplexMatrix l = ComplexMatrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (const auto& [x, mass] : spec.jump(i, j).atoms())
        l(i, j) += mass * std::exp(Complex{dot(x, c), dot(x, theta)});
  return l;
}

MeasureMatrix convolution_power(const ProcessSpec& spec, int n, const ConvolutionCaps& caps) {
  if (n < 0) throw PreconditionError("convolution power must be non-negative");
  const int cap = spec.dim() == 1 ? caps.max_power_1d : caps.max_power_nd;
  if (n > cap) throw ResourceError("convolution power " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  const int p = spec.states();
  const auto origin = LatticeVector::zero(static_cast<std::size_t>(spec.dim()));
  MeasureMatrix out{spec.dim(), p, std::vector<JumpMeasure>(static_cast<std::size_t>(p * p))};
  for (int i = 0; i < p; ++i) {
    detail::LayeredLaw law(spec, i, origin);
    for (int step = 0; step < n; ++step) law.step();
    for (int j = 0; j < p; ++j) {
      auto& entry = out.entries[static_cast<std::size_t>(i * p + j)];
      law.layer(j).for_each_nonzero(
          [&](const std::vector<std::int64_t>& c, double v) { entry.add(LatticeVector(c), v); });
    }
  }
  return out;
}

ComplexMatrix fourier(const MeasureMatrix& mu, const Eigen::VectorXd& theta) {
  ComplexMatrix f(mu.p, mu.p);
  for (int i = 0; i < mu.p; ++i)
    for (int j = 0; j < mu.p; ++j) f(i, j) = fourier_entry(mu.at(i, j), theta);
  return f;
}

PerronTriple perron_triple(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw PreconditionError("Perron data needs a nonempty square matrix");
  if ((m.array() < 0.0).any()) throw PreconditionError("Perron data needs a nonnegative matrix");
  if (!graph_irreducible(m)) throw PreconditionError("Perron data needs an irreducible matrix");

  PerronTriple t;
  double left_root = 0.0;
  t.right = positive_eigenvector(m, t.rho);
  t.left = positive_eigenvector(m.transpose(), left_root);
  if ((t.right.array() <= 0.0).any() || (t.left.array() <= 0.0).any())
    throw NumericError("Perron eigenvector is not entrywise positive");
  t.right /= t.right.maxCoeff();
  t.left /= t.left.dot(t.right);

  const double scale = std::max(t.rho, 1e-300);
  const double r_res = (m * t.right - t.rho * t.right).cwiseAbs().maxCoeff() / scale;
  const double l_res = (m.transpose() * t.left - t.rho * t.left).cwiseAbs().maxCoeff() / (scale * t.left.cwiseAbs().maxCoeff());
  if (r_res > 1e-10 || l_res > 1e-10) throw NumericError("Perron eigenpair residual above 1e-10");
  return t;
}

double perron_root(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed on nonnegative matrix");
  return solver.eigenvalues().real().maxCoeff();
}

double spectral_radius(const ComplexMatrix& m) {
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SpectralDecomposition leading_decomposition(const ComplexMatrix& m) {
  const Eigen::Index p = m.rows();
  SpectralDecomposition out;
  if (p == 1) {
    out.k = m(0, 0);
    out.proj = ComplexMatrix::Ones(1, 1);
    out.rem = ComplexMatrix::Zero(1, 1);
    out.gap = std::abs(out.k);
    return out;
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> right(m, true);
  if (right.info() != Eigen::Success) throw NumericError("complex eigensolver failed");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) order[static_cast<std::size_t>(k)] = k;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(right.eigenvalues()[a]) > std::abs(right.eigenvalues()[b]);
  });
  const Eigen::Index lead = order[0];
  out.k = right.eigenvalues()[lead];
  out.gap = std::abs(out.k) - std::abs(right.eigenvalues()[order[1]]);
  if (out.gap <= kSpectralGapTol) throw NumericError("leading eigenvalue is not separated from the spectrum");

  Eigen::ComplexEigenSolver<ComplexMatrix> left(m.transpose(), true);
  Eigen::Index lead_left = 0;
  for (Eigen::Index k = 1; k < p; ++k)
    if (std::abs(left.eigenvalues()[k] - out.k) < std::abs(left.eigenvalues()[lead_left] - out.k)) lead_left = k;
  const Eigen::VectorXcd phi = right.eigenvectors().col(lead);
  const Eigen::VectorXcd psi = left.eigenvectors().col(lead_left);
  const Complex norm = psi.transpose() * phi;
  out.proj = phi * psi.transpose() / norm;
  out.rem = m - out.k * out.proj;
  return out;
}

SpectralDecomposition leading_decomposition(const ProcessSpec& spec, const Eigen::VectorXd& theta) {
  return leading_decomposition(fourier(spec, theta));
}

Complex leading_fourier_eigenvalue(const ProcessSpec& spec, const Eigen::VectorXd& theta) {
  const ComplexMatrix f = fourier(spec, theta);
  if (f.rows() == 1) return f(0, 0);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(f, false);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < f.rows(); ++k)
    if (std::abs(solver.eigenvalues()[k] - 1.0) < std::abs(solver.eigenvalues()[best] - 1.0)) best = k;
  return solver.eigenvalues()[best];
}

ScanReport spectral_scan(const ProcessSpec& spec, int points_per_axis) {
  if (points_per_axis < 2) throw PreconditionError("spectral scan needs at least 2 points per axis");
  const int d = spec.dim();
  ScanReport report;
  report.points_per_axis = points_per_axis;
  const double step = 2.0 * std::numbers::pi / (points_per_axis - 1);
  report.exclusion_radius = step;
  report.argmax = Eigen::VectorXd::Zero(d);

  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd theta(d);
  while (true) {
    for (int k = 0; k < d; ++k) theta[k] = -std::numbers::pi + step * idx[static_cast<std::size_t>(k)];
    if (theta.norm() > report.exclusion_radius * (1.0 + 1e-9)) {
      const double r = spectral_radius(fourier(spec, theta));
      ++report.evaluated;
      if (r > report.max_radius) {
        report.max_radius = r;
        report.argmax = theta;
      }
    }
    int k = d - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == points_per_axis) idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  return report;
}

DerivativeCheck k_derivative_check(const ProcessSpec& spec) {
  const int d = spec.dim();
  const MomentData mom = moments(spec);
  const Eigen::MatrixXd sigma = energy_matrix(spec).sigma;
  auto k = [&](const Eigen::VectorXd& theta) { return leading_fourier_eigenvalue(spec, theta); };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);

  DerivativeCheck out;
  out.gradient = detail::gradient<Complex>(k, zero);
  out.hessian = detail::hessian<Complex>(k, zero);
  const Eigen::VectorXcd expected_grad = Complex{0.0, 1.0} * mom.global_drift.cast<Complex>();
  out.gradient_residual = (out.gradient - expected_grad).cwiseAbs().maxCoeff();
  out.hessian_residual = (out.hessian + sigma.cast<Complex>()).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace madd
