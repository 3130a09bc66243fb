#include "madd/sections.hpp"

#include <cmath>

#include "madd/errors.hpp"

namespace madd {

SectionedProcess::SectionedProcess(ProcessSpec base, SectionMatrix section)
    : base_(std::move(base)), section_(std::move(section)) {
  if (section_.g.rows() != base_.states() || section_.g.cols() != base_.dim())
    throw PreconditionError("section matrix must be p x d");
}

Eigen::VectorXd SectionedProcess::shift(int i, int j) const {
  return (section_.g.row(j) - section_.g.row(i)).transpose();
}

RealMeasure SectionedProcess::shifted_jump(int i, int j) const {
  const Eigen::VectorXd s = shift(i, j);
  RealMeasure out;
  out.reserve(base_.jump(i, j).size());
  for (const auto& [x, mass] : base_.jump(i, j).atoms()) out.push_back({x.to_real() + s, mass});
  return out;
}

std::vector<RealMeasure> SectionedProcess::shifted_jumps() const {
  std::vector<RealMeasure> out;
  const int p = states();
  out.reserve(static_cast<std::size_t>(p * p));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out.push_back(shifted_jump(i, j));
  return out;
}

SectionedProcess SectionedProcess::resectioned(const SectionMatrix& extra) const {
  return SectionedProcess(base_, SectionMatrix{section_.g + extra.g});
}

bool SectionedProcess::is_identity() const {
  const int p = states();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if ((shift(i, j).array() != 0.0).any()) return false;
  return true;
}

SectionedProcess apply_section(const ProcessSpec& spec, const SectionMatrix& g) { return SectionedProcess(spec, g); }

ComplexMatrix fourier(const SectionedProcess& process, const Eigen::VectorXd& theta) {
  const int p = process.states();
  ComplexMatrix f = ComplexMatrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (const auto& atom : process.shifted_jump(i, j)) f(i, j) += atom.mass * std::polar(1.0, atom.x.dot(theta));
  return f;
}

Eigen::MatrixXd markov_matrix(const SectionedProcess& process) { return process.base().markov_matrix(); }

MomentData moments(const SectionedProcess& process) {
  const int p = process.states();
  const int d = process.dim();
  MomentData out;
  out.pi = stationary_distribution(process.base());
  out.local_drifts.assign(static_cast<std::size_t>(p * p), Eigen::VectorXd::Zero(d));
  out.second_moments.assign(static_cast<std::size_t>(p * p), Eigen::MatrixXd::Zero(d, d));
  out.global_drift = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      auto& m = out.local_drifts[static_cast<std::size_t>(i * p + j)];
      auto& s = out.second_moments[static_cast<std::size_t>(i * p + j)];
      for (const auto& atom : process.shifted_jump(i, j)) {
        m += atom.mass * atom.x;
        s += atom.mass * atom.x * atom.x.transpose();
      }
      out.global_drift += out.pi[i] * m;
    }
  }
  return out;
}

SectionMatrix appropriate_section(const ProcessSpec& spec) {
  const int p = spec.states();
  const int d = spec.dim();
  const MomentData mom = moments(spec);
  if (p == 1) return SectionMatrix{Eigen::MatrixXd::Zero(1, d)};

  // Row i of `rhs` is sum_j m_{i,j} - m; columns lie in the orthogonal of pi.
  Eigen::MatrixXd rhs(p, d);
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd row = -mom.global_drift;
    for (int j = 0; j < p; ++j) row += mom.drift(i, j);
    rhs.row(i) = row.transpose();
  }
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p) - spec.markov_matrix();
  // Last row of g pinned to zero: drop the last column of A.
  const Eigen::MatrixXd reduced = A.leftCols(p - 1);
  const Eigen::MatrixXd head = reduced.colPivHouseholderQr().solve(rhs);

  SectionMatrix g{Eigen::MatrixXd::Zero(p, d)};
  g.g.topRows(p - 1) = head;
  const double residual = (A * g.g - rhs).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (residual > 1e-10 * scale) throw NumericError("appropriate section system is inconsistent");
  return g;
}

EnergyMatrix energy_matrix(const ProcessSpec& spec, const SectionMatrix& g) {
  const int p = spec.states();
  const MomentData mom = moments(apply_section(spec, g));
  EnergyMatrix out{Eigen::MatrixXd::Zero(spec.dim(), spec.dim())};
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out.sigma += mom.pi[i] * mom.second_moment(i, j);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(out.sigma);
  if (llt.info() != Eigen::Success)
    throw NumericError("energy matrix is not positive-definite (support lies in a hyperplane)");
  return out;
}

EnergyMatrix energy_matrix(const ProcessSpec& spec) { return energy_matrix(spec, appropriate_section(spec)); }

}  // namespace madd
