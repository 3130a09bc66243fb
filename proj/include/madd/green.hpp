#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "madd/boundary.hpp"
#include "madd/process_model.hpp"

namespace madd {

enum class GreenMethod { series, resolvent, monte_carlo };

[[nodiscard]] std::string to_string(GreenMethod m);
/// Accepts "series", "resolvent", "monte-carlo" (or "mc").
[[nodiscard]] GreenMethod parse_green_method(const std::string& name);

/// G((0,i),(x,j)) with an error indication whose meaning depends on the
/// method: tail bound (series), grid-refinement or extrapolation residual
/// (resolvent), standard error (monte-carlo).
struct GreenEstimate {
  double value = 0.0;
  GreenMethod method = GreenMethod::series;
  double error = 0.0;
  /// False when the series horizon ran out before the requested tolerance.
  bool converged = true;
  std::map<std::string, double> params;
};

/// Target state (x, j) of a Green function evaluation; j is 0-based.
struct GreenTarget {
  LatticeVector x;
  int j = 0;
};

struct SeriesOptions {
  int horizon = 2000;
  /// Stop early once the estimated tail drops below this (0 = run to horizon).
  double tolerance = 0.0;
  /// Atoms of the propagated law below this mass are dropped.
  double prune = 1e-20;
};

[[nodiscard]] GreenEstimate green_series(const ProcessSpec& spec, int i, const LatticeVector& x, int j,
                                         const SeriesOptions& options = {});

/// One propagation shared by all targets; the chain starts at (source, i).
[[nodiscard]] std::vector<GreenEstimate> green_series_batch(const ProcessSpec& spec, int i,
                                                            const std::vector<GreenTarget>& targets,
                                                            const SeriesOptions& options = {},
                                                            const LatticeVector& source = {});

enum class ResolventMode {
  /// Exact Fourier inversion of (I - L(c' + i theta))^{-1} at an interior c'.
  tilted,
  /// (I - t F(theta))^{-1} over a damping schedule, extrapolated to t = 1.
  damped,
  /// t = 1 on a midpoint grid (d >= 2 only).
  undamped,
};

[[nodiscard]] std::string to_string(ResolventMode m);
[[nodiscard]] ResolventMode parse_resolvent_mode(const std::string& name);

struct ResolventOptions {
  ResolventMode mode = ResolventMode::tilted;
  /// Grid points per axis; 0 picks 1024 (d=1), 256 (d=2), 48 (d>=3).
  int grid = 0;
  std::vector<double> damping{0.9, 0.95, 0.975, 0.9875};
  /// Relative tolerance for the grid-doubling check (tilted mode).
  double tolerance = 1e-8;
};

[[nodiscard]] GreenEstimate green_resolvent(const ProcessSpec& spec, int i, const LatticeVector& x, int j,
                                            const ResolventOptions& options = {});

[[nodiscard]] std::vector<GreenEstimate> green_resolvent_batch(const ProcessSpec& spec, int i,
                                                               const std::vector<GreenTarget>& targets,
                                                               const ResolventOptions& options = {});

struct McOptions {
  std::int64_t paths = 100000;
  int horizon = 500;
  std::uint64_t seed = 1;
};

[[nodiscard]] GreenEstimate green_mc(const ProcessSpec& spec, int i, const LatticeVector& x, int j,
                                     const McOptions& options = {});

[[nodiscard]] std::vector<GreenEstimate> green_mc_batch(const ProcessSpec& spec, int i,
                                                        const std::vector<GreenTarget>& targets,
                                                        const McOptions& options = {});

struct PathPoint {
  LatticeVector x;
  int state = 0;
};

/// One trajectory of length `steps` from (0, i); path 0 of the stream `seed`.
[[nodiscard]] std::vector<PathPoint> simulate_path(const ProcessSpec& spec, int i, int steps, std::uint64_t seed);

/// Exponent of |m_c| in the coefficient. The default re-derived value.
[[nodiscard]] inline double default_m_exponent(int d) { return (d - 3) / 2.0; }
/// Alternative exponent (d-1)/3.
[[nodiscard]] inline double printed_m_exponent(int d) { return (d - 1) / 3.0; }

struct AsymptoticOptions {
  /// NaN selects default_m_exponent(d).
  double m_exponent = std::numeric_limits<double>::quiet_NaN();
  BoundaryOptions boundary;
};

struct AsymptoticCoefficient {
  Eigen::VectorXd u;
  Eigen::VectorXd c;
  double m_c_norm = 0.0;
  /// Orthogonal, rotation * u = e_1, identity on span{u, e_1}^perp.
  Eigen::MatrixXd rotation;
  Eigen::MatrixXd sigma_u;
  Eigen::MatrixXd sigma_u_1;
  Eigen::MatrixXd proj0;
  Eigen::VectorXd phi;
  Eigen::MatrixXd chi;
  double m_exponent = 0.0;
};

/// Orthogonal map sending the unit vector u to e_1 and fixing the orthogonal
/// complement of span{u, e_1}.
[[nodiscard]] Eigen::MatrixXd rotation_to_e1(const Eigen::VectorXd& u);

[[nodiscard]] AsymptoticCoefficient asymptotic_coefficient(const ProcessSpec& spec, const Eigen::VectorXd& u,
                                                           const AsymptoticOptions& options = {});

/// chi_ij(x/|x|) |x|^{-(d-1)/2} exp(-c(x/|x|).x). Requires x != 0.
[[nodiscard]] double asymptotic_green(const ProcessSpec& spec, int i, const LatticeVector& x, int j,
                                      const AsymptoticOptions& options = {});

/// Coordinatewise rounding with ties toward +infinity.
[[nodiscard]] LatticeVector nearest_lattice_point(const Eigen::VectorXd& v);

/// max over targets of |G_c((0,i),(x,j)) - (phi_j/phi_i) e^{c.x} G((0,i),(x,j))|,
/// both sides by the series method.
[[nodiscard]] double doob_conjugation_residual(const ProcessSpec& spec, const Eigen::VectorXd& c, int i,
                                               const std::vector<GreenTarget>& targets,
                                               const SeriesOptions& options = {});

struct CompareOptions {
  std::vector<GreenMethod> methods{GreenMethod::series};
  SeriesOptions series;
  ResolventOptions resolvent;
  McOptions mc;
  AsymptoticOptions asymptotic;
  bool doob_residual = true;
};

struct CompareRow {
  double r = 0.0;
  LatticeVector x;
  GreenMethod method = GreenMethod::series;
  double value = 0.0;
  double error = 0.0;
  double asym = 0.0;
  /// value / asym
  double ratio = 0.0;
};

struct CompareReport {
  AsymptoticCoefficient coefficient;
  std::vector<CompareRow> rows;
  /// NaN when not requested.
  double doob_residual = std::numeric_limits<double>::quiet_NaN();
};

[[nodiscard]] CompareReport compare(const ProcessSpec& spec, const Eigen::VectorXd& u, const std::vector<double>& radii,
                                    int i, int j, const CompareOptions& options = {});

}  // namespace madd
