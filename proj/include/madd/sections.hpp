#pragma once

#include <vector>

#include <Eigen/Dense>

#include "madd/process_model.hpp"
#include "madd/transforms.hpp"

namespace madd {

/// p x d real matrix; row i is the offset attached to layer i.
struct SectionMatrix {
  Eigen::MatrixXd g;
};

struct RealAtom {
  Eigen::VectorXd x;
  double mass = 0.0;
};
using RealMeasure = std::vector<RealAtom>;

/// A process whose jumps from layer i to layer j are translated by
/// g_j - g_i. Probabilities are those of the base process; only supports move.
/// The section is stored separately from the base lattice supports, so
/// composing a section with its negation restores the base exactly.
class SectionedProcess {
 public:
  SectionedProcess(ProcessSpec base, SectionMatrix section);

  [[nodiscard]] const ProcessSpec& base() const noexcept { return base_; }
  [[nodiscard]] const SectionMatrix& section() const noexcept { return section_; }
  [[nodiscard]] int dim() const noexcept { return base_.dim(); }
  [[nodiscard]] int states() const noexcept { return base_.states(); }

  /// Translation applied to every atom of jump (i, j).
  [[nodiscard]] Eigen::VectorXd shift(int i, int j) const;
  [[nodiscard]] RealMeasure shifted_jump(int i, int j) const;
  /// Row-major p*p.
  [[nodiscard]] std::vector<RealMeasure> shifted_jumps() const;

  /// Applies a further section; sections compose additively.
  [[nodiscard]] SectionedProcess resectioned(const SectionMatrix& extra) const;

  /// True when every shift is exactly zero, i.e. supports equal the base.
  [[nodiscard]] bool is_identity() const;

 private:
  ProcessSpec base_;
  SectionMatrix section_;
};

[[nodiscard]] SectionedProcess apply_section(const ProcessSpec& spec, const SectionMatrix& g);

[[nodiscard]] ComplexMatrix fourier(const SectionedProcess& process, const Eigen::VectorXd& theta);
[[nodiscard]] Eigen::MatrixXd markov_matrix(const SectionedProcess& process);

/// Moments of the sectioned process (pi equals that of the base).
[[nodiscard]] MomentData moments(const SectionedProcess& process);

/// Section after which every layer's summed local drift equals the global
/// drift. Normalized so that the last row is zero.
[[nodiscard]] SectionMatrix appropriate_section(const ProcessSpec& spec);

struct EnergyMatrix {
  Eigen::MatrixXd sigma;
};

/// pi-weighted raw second moments of the appropriately sectioned process.
/// Throws NumericError when the result is not positive-definite.
[[nodiscard]] EnergyMatrix energy_matrix(const ProcessSpec& spec);

/// Same, for a caller-supplied appropriate section.
[[nodiscard]] EnergyMatrix energy_matrix(const ProcessSpec& spec, const SectionMatrix& g);

}  // namespace madd
