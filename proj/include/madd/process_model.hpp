#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace madd {

/// Structural tolerance: row masses, stationary vectors, Doob rows.
inline constexpr double kStructuralTol = 1e-12;
/// A global drift with smaller euclidean norm counts as centered.
inline constexpr double kDriftTol = 1e-10;

/// Lattice displacement in Z^d.
struct LatticeVector {
  std::vector<std::int64_t> coords;

  LatticeVector() = default;
  explicit LatticeVector(std::vector<std::int64_t> c) : coords(std::move(c)) {}
  LatticeVector(std::initializer_list<std::int64_t> c) : coords(c) {}

  [[nodiscard]] std::size_t dim() const noexcept { return coords.size(); }
  [[nodiscard]] Eigen::VectorXd to_real() const;
  [[nodiscard]] double norm() const;
  [[nodiscard]] static LatticeVector zero(std::size_t d) {
    return LatticeVector(std::vector<std::int64_t>(d, 0));
  }

  std::int64_t operator[](std::size_t k) const { return coords[k]; }
  LatticeVector operator+(const LatticeVector& o) const;
  LatticeVector operator-(const LatticeVector& o) const;
  auto operator<=>(const LatticeVector&) const = default;
};

/// Finite sub-probability measure on Z^d. Atoms carry strictly positive mass;
/// zero-mass atoms are dropped on insertion.
class JumpMeasure {
 public:
  using AtomMap = std::map<LatticeVector, double>;

  JumpMeasure() = default;
  explicit JumpMeasure(AtomMap atoms);

  /// Adds `mass` at `x`, merging with an existing atom.
  void add(const LatticeVector& x, double mass);

  [[nodiscard]] const AtomMap& atoms() const noexcept { return atoms_; }
  [[nodiscard]] bool empty() const noexcept { return atoms_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] double total_mass() const;
  [[nodiscard]] double mass_at(const LatticeVector& x) const;

 private:
  AtomMap atoms_;
};

/// Jump matrix of a Markov-additive process on Z^d x {1..p}. Entry (i, j) is
/// the law of the displacement of a transition from layer i to layer j.
/// Indices are 0-based in the C++ API.
class ProcessSpec {
 public:
  /// `jumps` is row-major, p*p entries. Throws SpecError if a row does not
  /// carry total mass 1, if an atom has the wrong dimension, or if the
  /// support is empty.
  ProcessSpec(int d, int p, std::vector<JumpMeasure> jumps);

  [[nodiscard]] int dim() const noexcept { return d_; }
  [[nodiscard]] int states() const noexcept { return p_; }
  [[nodiscard]] const JumpMeasure& jump(int i, int j) const { return jumps_[static_cast<std::size_t>(i * p_ + j)]; }
  [[nodiscard]] const std::vector<JumpMeasure>& jumps() const noexcept { return jumps_; }

  /// Row-mass matrix, i.e. the transition matrix of the modulating chain.
  [[nodiscard]] Eigen::MatrixXd markov_matrix() const;
  /// Largest euclidean norm of a support point.
  [[nodiscard]] double max_jump_norm() const;
  /// Largest sup-norm of a support point.
  [[nodiscard]] std::int64_t max_jump_sup() const;
  [[nodiscard]] std::size_t atom_count() const;

 private:
  int d_;
  int p_;
  std::vector<JumpMeasure> jumps_;
};

struct ValidationReport {
  bool rows_stochastic = false;
  bool markov_irreducible = false;
  bool full_chain_irreducible = false;
  bool aperiodic = false;
  bool non_centered = false;

  /// Index of the subgroup of Z^d generated by closed-walk displacements
  /// (1 means they generate Z^d, 0 means rank deficient).
  std::int64_t displacement_lattice_index = 0;
  /// True when closed-walk displacements span Z^d as a cone, not just a group.
  bool displacement_cone_full = false;
  /// gcd of the lengths of zero-displacement closed walks (0 if none exist).
  std::int64_t period = 0;
  std::size_t cycles_enumerated = 0;
  /// Set when the labelled-cycle enumeration hit its cap; the cone verdict is
  /// then only a lower bound.
  bool cycle_enumeration_truncated = false;

  /// Max spectral radius of the Fourier transform on a coarse grid away
  /// from 0; below 1 certifies aperiodicity of an irreducible chain.
  double spectral_scan_max = 0.0;
  double global_drift_norm = 0.0;

  std::vector<std::string> diagnostics;

  [[nodiscard]] bool all() const noexcept {
    return rows_stochastic && markov_irreducible && full_chain_irreducible && aperiodic && non_centered;
  }
};

/// Cycle-lattice decision of the standing assumptions.
[[nodiscard]] ValidationReport validate(const ProcessSpec& spec);

/// Strong connectivity of the layer graph (edge i -> j iff jump(i,j) nonempty).
[[nodiscard]] bool markov_irreducible(const ProcessSpec& spec);

/// Stationary row vector of the modulating chain. Throws PreconditionError
/// when the modulating chain is reducible.
[[nodiscard]] Eigen::RowVectorXd stationary_distribution(const ProcessSpec& spec);

struct MomentData {
  Eigen::RowVectorXd pi;
  /// Row-major p*p, m_{i,j} = sum_x x mu_{i,j}(x).
  std::vector<Eigen::VectorXd> local_drifts;
  /// Row-major p*p raw second moments.
  std::vector<Eigen::MatrixXd> second_moments;
  Eigen::VectorXd global_drift;

  [[nodiscard]] const Eigen::VectorXd& drift(int i, int j) const {
    return local_drifts[static_cast<std::size_t>(i * pi.size() + j)];
  }
  [[nodiscard]] const Eigen::MatrixXd& second_moment(int i, int j) const {
    return second_moments[static_cast<std::size_t>(i * pi.size() + j)];
  }
};

[[nodiscard]] MomentData moments(const ProcessSpec& spec);

}  // namespace madd
