#include "madd/process_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#include "integer_lattice.hpp"
#include "madd/errors.hpp"
#include "madd/transforms.hpp"

namespace madd {

Eigen::VectorXd LatticeVector::to_real() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t k = 0; k < coords.size(); ++k) v[static_cast<Eigen::Index>(k)] = static_cast<double>(coords[k]);
  return v;
}

double LatticeVector::norm() const { return to_real().norm(); }

LatticeVector LatticeVector::operator+(const LatticeVector& o) const {
  LatticeVector r = *this;
  for (std::size_t k = 0; k < coords.size(); ++k) r.coords[k] += o.coords[k];
  return r;
}

LatticeVector LatticeVector::operator-(const LatticeVector& o) const {
  LatticeVector r = *this;
  for (std::size_t k = 0; k < coords.size(); ++k) r.coords[k] -= o.coords[k];
  return r;
}

JumpMeasure::JumpMeasure(AtomMap atoms) {
  for (const auto& [x, mass] : atoms) add(x, mass);
}

void JumpMeasure::add(const LatticeVector& x, double mass) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw SpecError("atom mass must be a finite non-negative number");
  if (mass == 0.0) return;
  atoms_[x] += mass;
}

double JumpMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& [x, mass] : atoms_) s += mass;
  return s;
}

double JumpMeasure::mass_at(const LatticeVector& x) const {
  const auto it = atoms_.find(x);
  return it == atoms_.end() ? 0.0 : it->second;
}

ProcessSpec::ProcessSpec(int d, int p, std::vector<JumpMeasure> jumps) : d_(d), p_(p), jumps_(std::move(jumps)) {
  if (d < 1) throw SpecError("dimension d must be positive");
  if (p < 1) throw SpecError("number of layers p must be positive");
  if (jumps_.size() != static_cast<std::size_t>(p) * static_cast<std::size_t>(p))
    throw SpecError("jump matrix must have p*p entries");
  bool any = false;
  for (int i = 0; i < p; ++i) {
    double row = 0.0;
    for (int j = 0; j < p; ++j) {
      const auto& mu = jump(i, j);
      for (const auto& [x, mass] : mu.atoms()) {
        if (x.dim() != static_cast<std::size_t>(d))
          throw SpecError("atom of jumps[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                          "] has dimension " + std::to_string(x.dim()) + ", expected " + std::to_string(d));
      }
      const double total = mu.total_mass();
      if (total > 1.0 + kStructuralTol)
        throw SpecError("jumps[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "] has mass above 1");
      row += total;
      any = any || !mu.empty();
    }
    if (std::abs(row - 1.0) > kStructuralTol) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", row);
      throw SpecError("row " + std::to_string(i + 1) + " has total mass " + buf + ", expected 1");
    }
  }
  if (!any) throw SpecError("support of the jump matrix is empty");
}

Eigen::MatrixXd ProcessSpec::markov_matrix() const {
  Eigen::MatrixXd P(p_, p_);
  for (int i = 0; i < p_; ++i)
    for (int j = 0; j < p_; ++j) P(i, j) = jump(i, j).total_mass();
  return P;
}

double ProcessSpec::max_jump_norm() const {
  double r = 0.0;
  for (const auto& mu : jumps_)
    for (const auto& [x, mass] : mu.atoms()) r = std::max(r, x.norm());
  return r;
}

std::int64_t ProcessSpec::max_jump_sup() const {
  std::int64_t r = 0;
  for (const auto& mu : jumps_)
    for (const auto& [x, mass] : mu.atoms())
      for (auto c : x.coords) r = std::max(r, std::abs(c));
  return r;
}

std::size_t ProcessSpec::atom_count() const {
  std::size_t n = 0;
  for (const auto& mu : jumps_) n += mu.size();
  return n;
}

namespace {

std::vector<bool> reachable(const ProcessSpec& spec, int start, bool reverse) {
  const int p = spec.states();
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  std::queue<int> todo;
  todo.push(start);
  seen[static_cast<std::size_t>(start)] = true;
  while (!todo.empty()) {
    const int v = todo.front();
    todo.pop();
    for (int w = 0; w < p; ++w) {
      const bool edge = reverse ? !spec.jump(w, v).empty() : !spec.jump(v, w).empty();
      if (edge && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        todo.push(w);
      }
    }
  }
  return seen;
}

constexpr std::size_t kMaxStateCycles = 100'000;
constexpr std::size_t kMaxLabelledCycles = 200'000;

struct CycleData {
  // (x_1..x_d, length) for one labelled version of each state cycle plus
  // (label difference, 0) for parallel atoms on every edge.
  std::vector<detail::IntVector> augmented;
  // displacement of every labelled simple cycle (capped)
  std::vector<detail::IntVector> labelled;
  std::size_t state_cycles = 0;
  bool truncated = false;
};

void collect_labelled(const ProcessSpec& spec, const std::vector<int>& cycle, CycleData& out) {
  const auto d = static_cast<std::size_t>(spec.dim());
  std::vector<detail::IntVector> partial{detail::IntVector(d, 0)};
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const auto& mu = spec.jump(cycle[k], cycle[(k + 1) % cycle.size()]);
    std::vector<detail::IntVector> next;
    for (const auto& base : partial) {
      for (const auto& [x, mass] : mu.atoms()) {
        auto v = base;
        for (std::size_t c = 0; c < d; ++c) v[c] += x[c];
        next.push_back(std::move(v));
        if (next.size() + out.labelled.size() > kMaxLabelledCycles) {
          out.truncated = true;
          break;
        }
      }
      if (out.truncated) break;
    }
    partial = std::move(next);
    if (out.truncated) break;
  }
  if (!out.truncated) out.labelled.insert(out.labelled.end(), partial.begin(), partial.end());
}

// Simple cycles of the layer graph, each reported once from its smallest vertex.
CycleData enumerate_cycles(const ProcessSpec& spec) {
  const int p = spec.states();
  const auto d = static_cast<std::size_t>(spec.dim());
  CycleData out;

  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const auto& atoms = spec.jump(i, j).atoms();
      if (atoms.size() < 2) continue;
      const auto& first = atoms.begin()->first;
      for (auto it = std::next(atoms.begin()); it != atoms.end(); ++it) {
        detail::IntVector diff(d + 1, 0);
        for (std::size_t c = 0; c < d; ++c) diff[c] = it->first[c] - first[c];
        out.augmented.push_back(std::move(diff));
      }
    }
  }

  std::vector<int> path;
  std::vector<bool> on_path(static_cast<std::size_t>(p), false);
  auto record = [&](const std::vector<int>& cycle) {
    ++out.state_cycles;
    detail::IntVector aug(d + 1, 0);
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      const auto& x = spec.jump(cycle[k], cycle[(k + 1) % cycle.size()]).atoms().begin()->first;
      for (std::size_t c = 0; c < d; ++c) aug[c] += x[c];
    }
    aug[d] = static_cast<std::int64_t>(cycle.size());
    out.augmented.push_back(std::move(aug));
    collect_labelled(spec, cycle, out);
  };
  auto dfs = [&](auto&& self, int start, int v) -> void {
    if (out.state_cycles >= kMaxStateCycles) {
      out.truncated = true;
      return;
    }
    for (int w = start; w < p; ++w) {
      if (spec.jump(v, w).empty()) continue;
      if (w == start) {
        record(path);
      } else if (!on_path[static_cast<std::size_t>(w)]) {
        on_path[static_cast<std::size_t>(w)] = true;
        path.push_back(w);
        self(self, start, w);
        path.pop_back();
        on_path[static_cast<std::size_t>(w)] = false;
      }
    }
  };
  for (int s = 0; s < p; ++s) {
    path = {s};
    on_path.assign(static_cast<std::size_t>(p), false);
    on_path[static_cast<std::size_t>(s)] = true;
    dfs(dfs, s, s);
  }
  return out;
}

}  // namespace

bool markov_irreducible(const ProcessSpec& spec) {
  const auto fwd = reachable(spec, 0, false);
  const auto bwd = reachable(spec, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

ValidationReport validate(const ProcessSpec& spec) {
  ValidationReport report;
  const auto d = static_cast<std::size_t>(spec.dim());

  const Eigen::MatrixXd P = spec.markov_matrix();
  report.rows_stochastic = ((P.rowwise().sum().array() - 1.0).abs() < kStructuralTol).all();
  report.markov_irreducible = markov_irreducible(spec);
  if (!report.markov_irreducible) report.diagnostics.emplace_back("modulating chain is reducible");

  const CycleData cycles = enumerate_cycles(spec);
  report.cycles_enumerated = cycles.labelled.size();
  report.cycle_enumeration_truncated = cycles.truncated;
  if (cycles.truncated) report.diagnostics.emplace_back("cycle enumeration truncated; cone verdict is a lower bound");

  std::vector<detail::IntVector> displacement_gens;
  for (const auto& a : cycles.augmented) displacement_gens.emplace_back(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(d));
  report.displacement_lattice_index = detail::lattice_index(displacement_gens, d);
  report.displacement_cone_full = detail::cone_is_full(cycles.labelled, d).full;
  report.period = detail::last_coordinate_period(cycles.augmented, d);

  report.full_chain_irreducible =
      report.markov_irreducible && report.displacement_lattice_index == 1 && report.displacement_cone_full;
  if (report.displacement_lattice_index != 1)
    report.diagnostics.emplace_back("closed-walk displacements generate a sublattice of index " +
                                    std::to_string(report.displacement_lattice_index));
  if (!report.displacement_cone_full)
    report.diagnostics.emplace_back("closed-walk displacements lie in a half-space");
  report.aperiodic = report.period == 1;
  if (!report.aperiodic)
    report.diagnostics.emplace_back("gcd of zero-displacement return times is " + std::to_string(report.period));

  if (report.markov_irreducible) {
    const MomentData mom = moments(spec);
    report.global_drift_norm = mom.global_drift.norm();
    report.non_centered = report.global_drift_norm > kDriftTol;
    if (!report.non_centered) report.diagnostics.emplace_back("global drift vanishes (centered process)");
  }

  const int grid = d == 1 ? 401 : d == 2 ? 101 : d == 3 ? 31 : 0;
  if (grid > 0) {
    report.spectral_scan_max = spectral_scan(spec, grid).max_radius;
    const bool spectral_aperiodic = report.spectral_scan_max < 1.0 - 1e-9;
    if (report.full_chain_irreducible && spectral_aperiodic != report.aperiodic)
      report.diagnostics.emplace_back("spectral scan disagrees with the cycle-lattice aperiodicity verdict");
  } else {
    report.spectral_scan_max = std::nan("");
  }
  return report;
}

Eigen::RowVectorXd stationary_distribution(const ProcessSpec& spec) {
  if (!markov_irreducible(spec)) throw PreconditionError("stationary distribution requires an irreducible modulating chain");
  const int p = spec.states();
  const Eigen::MatrixXd P = spec.markov_matrix();
  // pi (P - I) = 0 with sum(pi) = 1, solved as a stacked least-squares system.
  Eigen::MatrixXd A(p + 1, p);
  A.topRows(p) = (P - Eigen::MatrixXd::Identity(p, p)).transpose();
  A.row(p).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  b[p] = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);
  pi /= pi.sum();
  if ((pi.array() <= 0.0).any()) throw NumericError("stationary distribution has non-positive entries");
  const double residual = (pi.transpose() * P - pi.transpose()).cwiseAbs().maxCoeff();
  if (residual > kStructuralTol) throw NumericError("stationary distribution residual too large");
  return pi.transpose();
}

MomentData moments(const ProcessSpec& spec) {
  const int p = spec.states();
  const int d = spec.dim();
  MomentData out;
  out.pi = stationary_distribution(spec);
  out.local_drifts.assign(static_cast<std::size_t>(p * p), Eigen::VectorXd::Zero(d));
  out.second_moments.assign(static_cast<std::size_t>(p * p), Eigen::MatrixXd::Zero(d, d));
  out.global_drift = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      auto& m = out.local_drifts[static_cast<std::size_t>(i * p + j)];
      auto& s = out.second_moments[static_cast<std::size_t>(i * p + j)];
      for (const auto& [x, mass] : spec.jump(i, j).atoms()) {
        const Eigen::VectorXd xr = x.to_real();
        m += mass * xr;
        s += mass * xr * xr.transpose();
      }
      out.global_drift += out.pi[i] * m;
    }
  }
  return out;
}

}  // namespace madd
