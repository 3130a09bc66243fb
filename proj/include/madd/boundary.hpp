#pragma once

#include <vector>

#include <Eigen/Dense>

#include "madd/process_model.hpp"

namespace madd {

/// Perron root of laplace(spec, c) with finite-difference derivatives.
struct RhoEvaluation {
  Eigen::VectorXd c;
  double rho = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Perron root of the real Laplace transform at c.
[[nodiscard]] double spectral_radius_at(const ProcessSpec& spec, const Eigen::VectorXd& c);

[[nodiscard]] RhoEvaluation rho_eval(const ProcessSpec& spec, const Eigen::VectorXd& c);

/// Unconstrained minimizer of rho; an interior point of {rho <= 1}.
[[nodiscard]] Eigen::VectorXd rho_minimizer(const ProcessSpec& spec);

/// Point c + r*w on {rho = 1} along the ray from an interior point c.
[[nodiscard]] Eigen::VectorXd ray_to_boundary(const ProcessSpec& spec, const Eigen::VectorXd& interior,
                                              const Eigen::VectorXd& w);

struct BoundaryOptions {
  int max_iterations = 200;
  /// Target for |rho - 1| and |grad rho / |grad rho| - u|.
  double tolerance = 1e-12;
};

struct BoundaryPoint {
  Eigen::VectorXd u;
  Eigen::VectorXd c;
  /// Drift of the Doob transform at c.
  Eigen::VectorXd m_c;
  double rho_residual = 0.0;
  /// |m_c / |m_c| - u|
  double direction_residual = 0.0;
  int iterations = 0;
};

/// The point of {rho = 1} whose Doob drift points along u, obtained by
/// maximizing u.c over {rho <= 1}. Throws PreconditionError for a centered
/// process or a non-unit u, NumericError when the solver does not converge.
[[nodiscard]] BoundaryPoint boundary_point(const ProcessSpec& spec, const Eigen::VectorXd& u,
                                           const BoundaryOptions& options = {});

struct DoobTransform {
  Eigen::VectorXd c;
  /// Right Perron vector of laplace(spec, c), max entry 1.
  Eigen::VectorXd phi;
  ProcessSpec transformed;
};

/// Exponential reweighting (phi_j / phi_i) e^{c.x} mu_{i,j}(x) at a point
/// with rho(c) = 1. Throws PreconditionError when |rho(c) - 1| >= 1e-8.
[[nodiscard]] DoobTransform doob_transform(const ProcessSpec& spec, const Eigen::VectorXd& c);

/// n unit vectors spread over the sphere (alternating +-1 when d = 1).
[[nodiscard]] std::vector<Eigen::VectorXd> sample_directions(int d, int n);

struct BoundaryTrace {
  std::vector<BoundaryPoint> points;
  /// Largest distance between consecutive boundary points.
  double max_step = 0.0;
  /// Largest direction round-trip residual.
  double max_direction_residual = 0.0;
};

[[nodiscard]] BoundaryTrace boundary_trace(const ProcessSpec& spec, int n_directions,
                                           const BoundaryOptions& options = {});

}  // namespace madd
