#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "madd/process_model.hpp"

namespace madd {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Entry (i,j) = sum_x exp(i x.theta) mu_{i,j}(x).
[[nodiscard]] ComplexMatrix fourier(const ProcessSpec& spec, const Eigen::VectorXd& theta);

/// Entry (i,j) = sum_x exp(c.x) mu_{i,j}(x).
[[nodiscard]] Eigen::MatrixXd laplace(const ProcessSpec& spec, const Eigen::VectorXd& c);

/// Laplace transform at the complex point c + i theta.
[[nodiscard]] ComplexMatrix laplace_complex(const ProcessSpec& spec, const Eigen::VectorXd& c, const Eigen::VectorXd& theta);

/// p x p array of measures, row-major.
struct MeasureMatrix {
  int d = 0;
  int p = 0;
  std::vector<JumpMeasure> entries;

  [[nodiscard]] const JumpMeasure& at(int i, int j) const { return entries[static_cast<std::size_t>(i * p + j)]; }
};

struct ConvolutionCaps {
  int max_power_1d = 10'000;
  int max_power_nd = 2'000;
};

/// n-fold extended convolution power; entry (i,j) is the law of (A_n, M_n = j)
/// started from (0, i). Throws ResourceError above the cap.
[[nodiscard]] MeasureMatrix convolution_power(const ProcessSpec& spec, int n, const ConvolutionCaps& caps = {});

/// Fourier transform of a measure matrix (used to check the homomorphism
/// property against powers of fourier()).
[[nodiscard]] ComplexMatrix fourier(const MeasureMatrix& mu, const Eigen::VectorXd& theta);

struct PerronTriple {
  double rho = 0.0;
  /// Right eigenvector, positive, max entry 1.
  Eigen::VectorXd right;
  /// Left eigenvector, positive, left.dot(right) == 1.
  Eigen::VectorXd left;
};

/// Perron root and vectors of a nonnegative irreducible matrix.
[[nodiscard]] PerronTriple perron_triple(const Eigen::MatrixXd& m);

/// Perron root only (cheaper; no irreducibility check).
[[nodiscard]] double perron_root(const Eigen::MatrixXd& m);

inline constexpr double kSpectralGapTol = 1e-8;

struct SpectralDecomposition {
  Complex k;
  ComplexMatrix proj;
  ComplexMatrix rem;
  /// |k| minus the modulus of the next eigenvalue.
  double gap = 0.0;
};

/// Splits a matrix into k * proj + rem along its simple leading eigenvalue.
/// Throws NumericError when the modulus gap is below kSpectralGapTol.
[[nodiscard]] SpectralDecomposition leading_decomposition(const ComplexMatrix& m);
[[nodiscard]] SpectralDecomposition leading_decomposition(const ProcessSpec& spec, const Eigen::VectorXd& theta);

/// Eigenvalue of the Fourier transform that continues k(0) = 1, i.e. the one
/// closest to 1 (valid near theta = 0).
[[nodiscard]] Complex leading_fourier_eigenvalue(const ProcessSpec& spec, const Eigen::VectorXd& theta);

/// Largest eigenvalue modulus.
[[nodiscard]] double spectral_radius(const ComplexMatrix& m);

struct ScanReport {
  double max_radius = 0.0;
  Eigen::VectorXd argmax;
  int points_per_axis = 0;
  double exclusion_radius = 0.0;
  std::size_t evaluated = 0;
};

/// Max spectral radius of fourier(spec, theta) over the grid
/// -pi + 2 pi k / (points - 1) of [-pi, pi]^d, excluding the closed ball of
/// radius one grid step around 0.
[[nodiscard]] ScanReport spectral_scan(const ProcessSpec& spec, int points_per_axis);

struct DerivativeCheck {
  Eigen::VectorXcd gradient;
  Eigen::MatrixXcd hessian;
  /// max |grad k(0) - i m|
  double gradient_residual = 0.0;
  /// max |H_k(0) + sigma|
  double hessian_residual = 0.0;
};

/// Finite-difference derivatives of the leading Fourier eigenvalue at 0,
/// compared with i*m and -sigma.
[[nodiscard]] DerivativeCheck k_derivative_check(const ProcessSpec& spec);

}  // namespace madd
