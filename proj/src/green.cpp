#include "madd/green.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "lattice_field.hpp"
#include "madd/errors.hpp"
#include "madd/sections.hpp"
#include "madd/transforms.hpp"
#include "parallel.hpp"

namespace madd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMaxGridPoints = std::size_t{1} << 26;
constexpr std::int64_t kMcChunk = 1024;

void check_state(const ProcessSpec& spec, int s, const char* what) {
  if (s < 0 || s >= spec.states()) throw PreconditionError(std::string(what) + " state index out of range");
}

void check_targets(const ProcessSpec& spec, int i, const std::vector<GreenTarget>& targets) {
  check_state(spec, i, "source");
  for (const auto& t : targets) {
    check_state(spec, t.j, "target");
    if (t.x.dim() != static_cast<std::size_t>(spec.dim())) throw PreconditionError("target has the wrong dimension");
  }
}

void require_transient(const ProcessSpec& spec) {
  if (moments(spec).global_drift.norm() <= kDriftTol)
    throw PreconditionError("non-centering assumption violated: the global drift is zero");
}

std::int64_t sup_distance(const std::vector<std::int64_t>& a, const LatticeVector& b) {
  std::int64_t m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double dot(const LatticeVector& x, const Eigen::VectorXd& v) { return x.to_real().dot(v); }

// Tail of a positive sequence from the geometric rate of its last terms.
double geometric_tail(const std::vector<double>& window) {
  const double last = window.back();
  const double first = window.front();
  if (last == 0.0) return 0.0;
  if (first <= 0.0) return std::numeric_limits<double>::infinity();
  const double r = std::pow(last / first, 1.0 / static_cast<double>(window.size() - 1));
  if (!(r < 1.0)) return std::numeric_limits<double>::infinity();
  // Doubled: window ratios of r^n n^{-a} terms underestimate r.
  return 2.0 * last * r / (1.0 - r);
}

int default_grid(int d) { return d == 1 ? 1024 : d == 2 ? 256 : 48; }

std::size_t grid_size(int d, int m) {
  std::size_t n = 1;
  for (int k = 0; k < d; ++k) {
    n *= static_cast<std::size_t>(m);
    if (n > kMaxGridPoints) throw ResourceError("Fourier grid exceeds the point budget");
  }
  return n;
}

// e^{-i 2 pi k x / m} with the angle reduced exactly in integers.
std::complex<double> grid_phase(std::int64_t k, std::int64_t x, std::int64_t m) {
  std::int64_t r = (k * x) % m;
  if (r < 0) r += m;
  return std::polar(1.0, -kTwoPi * static_cast<double>(r) / static_cast<double>(m));
}

// Runs body(k0) for every first-axis index, in parallel.
template <class Body>
void for_each_slab(int m, Body&& body) {
  detail::parallel_for(static_cast<std::size_t>(m), [&](std::size_t k0) { body(static_cast<int>(k0)); });
}

struct Atom {
  Eigen::VectorXd x;
  double mass;
  int from;
  int to;
};

std::vector<Atom> flat_atoms(const ProcessSpec& spec) {
  std::vector<Atom> out;
  for (int i = 0; i < spec.states(); ++i)
    for (int j = 0; j < spec.states(); ++j)
      for (const auto& [x, mass] : spec.jump(i, j).atoms()) out.push_back({x.to_real(), mass, i, j});
  return out;
}

// Iterates all grid multi-indices whose first index is k0.
template <class F>
void for_each_point(int d, int m, int k0, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  idx[0] = k0;
  while (true) {
    f(idx);
    int k = d - 1;
    while (k >= 1 && ++idx[static_cast<std::size_t>(k)] == m) idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 1) break;
  }
}

// Result of inverting one grid of matrices at a set of targets.
struct GridSums {
  std::vector<std::complex<double>> full;
  std::vector<std::complex<double>> half;
  double abs_sum = 0.0;
};

// Sums F(theta)_{i, j_t} e^{-i theta.x_t} over theta = 2 pi (k + offset) / m.
// `matrix(theta)` returns the p x p matrix to invert-and-sample. When
// `offset` is 0 the even sub-grid is accumulated separately.
template <class MatrixAt>
GridSums grid_inverse_sums(int d, int m, double offset, int i, const std::vector<GreenTarget>& targets,
                           MatrixAt&& matrix_at) {
  grid_size(d, m);
  const std::size_t nt = targets.size();
  std::vector<GridSums> slabs(static_cast<std::size_t>(m));
  // With a half-integer offset the phase of index k is that of 2k+1 on a 2m grid.
  const bool mid = offset != 0.0;
  const std::int64_t period = mid ? 2 * m : m;
  for_each_slab(m, [&](int k0) {
    GridSums& acc = slabs[static_cast<std::size_t>(k0)];
    acc.full.assign(nt, 0.0);
    acc.half.assign(nt, 0.0);
    Eigen::VectorXd theta(d);
    for_each_point(d, m, k0, [&](const std::vector<int>& idx) {
      bool even = !mid;
      for (int a = 0; a < d; ++a) {
        theta[a] = kTwoPi * (idx[static_cast<std::size_t>(a)] + offset) / m;
        even = even && idx[static_cast<std::size_t>(a)] % 2 == 0;
      }
      const ComplexMatrix f = matrix_at(theta);
      for (std::size_t t = 0; t < nt; ++t) {
        const auto& x = targets[t].x;
        std::complex<double> phase{1.0, 0.0};
        for (int a = 0; a < d; ++a) {
          const std::int64_t k = idx[static_cast<std::size_t>(a)];
          phase *= grid_phase(mid ? 2 * k + 1 : k, x[static_cast<std::size_t>(a)], period);
        }
        const std::complex<double> v = f(i, targets[t].j) * phase;
        acc.full[t] += v;
        if (even) acc.half[t] += v;
        acc.abs_sum += std::abs(f(i, targets[t].j));
      }
    });
  });
  GridSums out;
  out.full.assign(nt, 0.0);
  out.half.assign(nt, 0.0);
  for (const auto& s : slabs) {
    for (std::size_t t = 0; t < nt; ++t) {
      out.full[t] += s.full[t];
      out.half[t] += s.half[t];
    }
    out.abs_sum += s.abs_sum;
  }
  return out;
}

ComplexMatrix resolvent_of(const ComplexMatrix& l, double t) {
  const Eigen::Index p = l.rows();
  const ComplexMatrix a = ComplexMatrix::Identity(p, p) - t * l;
  if (p == 1) return ComplexMatrix::Constant(1, 1, 1.0 / a(0, 0));
  return a.partialPivLu().inverse();
}

// Polynomial extrapolation to s = 0 through (s_k, v_k); also returns the
// difference with the extrapolant that omits the last node.
std::pair<double, double> neville_at_zero(const std::vector<double>& s, const std::vector<double>& v) {
  const std::size_t n = s.size();
  std::vector<double> p(v);
  double previous = v.front();
  double current = v.front();
  // p[k] after level l holds the value at 0 of the interpolant on nodes k..k+l.
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t k = 0; k + level < n; ++k)
      p[k] = (s[k + level] * p[k] - s[k] * p[k + 1]) / (s[k + level] - s[k]);
    previous = current;
    current = p[0];
  }
  if (n == 1) return {current, std::numeric_limits<double>::infinity()};
  return {current, std::abs(current - previous)};
}

std::vector<GreenEstimate> resolvent_tilted(const ProcessSpec& spec, int i, const std::vector<GreenTarget>& targets,
                                            const ResolventOptions& opt, int m) {
  const int d = spec.dim();
  const std::vector<Atom> atoms = flat_atoms(spec);
  const Eigen::VectorXd c_min = rho_minimizer(spec);
  const int p = spec.states();

  std::vector<GreenEstimate> out(targets.size());
  // Targets sharing a direction share a tilt and hence a grid pass.
  std::vector<bool> done(targets.size(), false);
  for (std::size_t t0 = 0; t0 < targets.size(); ++t0) {
    if (done[t0]) continue;
    const Eigen::VectorXd x0 = targets[t0].x.to_real();
    const bool origin = x0.norm() == 0.0;
    std::vector<std::size_t> group;
    std::vector<GreenTarget> group_targets;
    for (std::size_t t = t0; t < targets.size(); ++t) {
      const Eigen::VectorXd xt = targets[t].x.to_real();
      const bool same = origin ? xt.norm() == 0.0
                               : xt.norm() > 0.0 && (xt.normalized() - x0.normalized()).norm() < 1e-12;
      if (!done[t] && same) {
        done[t] = true;
        group.push_back(t);
        group_targets.push_back(targets[t]);
      }
    }
    Eigen::VectorXd tilt = c_min;
    if (!origin) tilt = c_min + 0.5 * (boundary_point(spec, x0.normalized()).c - c_min);

    auto matrix_at = [&](const Eigen::VectorXd& theta) {
      ComplexMatrix l = ComplexMatrix::Zero(p, p);
      for (const auto& a : atoms) l(a.from, a.to) += a.mass * std::exp(std::complex<double>(a.x.dot(tilt), a.x.dot(theta)));
      return resolvent_of(l, 1.0);
    };
    const GridSums sums = grid_inverse_sums(d, m, 0.0, i, group_targets, matrix_at);
    const double count = static_cast<double>(grid_size(d, m));
    const double half_count = count / std::pow(2.0, d);
    for (std::size_t g = 0; g < group.size(); ++g) {
      const double scale = std::exp(-dot(group_targets[g].x, tilt));
      const double full = sums.full[g].real() / count * scale;
      const double half = sums.half[g].real() / half_count * scale;
      const double mean_abs = sums.abs_sum / (count * static_cast<double>(group.size()));
      const double floor = 1e-15 * mean_abs * scale * std::sqrt(count);
      const double diff = std::abs(full - half);
      if (diff > 10.0 * std::max(opt.tolerance * std::abs(full), floor))
        throw NumericError("resolvent grid too coarse: M and M/2 disagree by " + std::to_string(diff));
      GreenEstimate& e = out[group[g]];
      e.method = GreenMethod::resolvent;
      e.value = std::max(full, 0.0);
      e.error = diff + floor;
      e.params = {{"grid", m}, {"mode", 0}};
      for (int a = 0; a < d; ++a) e.params["tilt_" + std::to_string(a + 1)] = tilt[a];
    }
  }
  return out;
}

std::vector<GreenEstimate> resolvent_damped(const ProcessSpec& spec, int i, const std::vector<GreenTarget>& targets,
                                            const ResolventOptions& opt, int m) {
  const int d = spec.dim();
  if (opt.damping.empty()) throw PreconditionError("damping schedule is empty");
  for (double t : opt.damping)
    if (!(t > 0.0 && t < 1.0)) throw PreconditionError("damping factors must lie in (0, 1)");
  const std::size_t nt = targets.size();
  const std::size_t ns = opt.damping.size();
  // One pass per damping factor; target list replicated per factor is cheaper
  // to express as separate passes.
  std::vector<std::vector<double>> full(nt, std::vector<double>(ns));
  std::vector<std::vector<double>> half(nt, std::vector<double>(ns));
  const double count = static_cast<double>(grid_size(d, m));
  const double half_count = count / std::pow(2.0, d);
  for (std::size_t s = 0; s < ns; ++s) {
    const double t = opt.damping[s];
    const GridSums sums =
        grid_inverse_sums(d, m, 0.0, i, targets, [&](const Eigen::VectorXd& theta) { return resolvent_of(fourier(spec, theta), t); });
    for (std::size_t k = 0; k < nt; ++k) {
      full[k][s] = sums.full[k].real() / count;
      half[k][s] = sums.half[k].real() / half_count;
    }
  }
  std::vector<double> nodes(ns);
  for (std::size_t s = 0; s < ns; ++s) nodes[s] = 1.0 - opt.damping[s];
  std::vector<GreenEstimate> out(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto [value, increment] = neville_at_zero(nodes, full[k]);
    const auto [half_value, half_increment] = neville_at_zero(nodes, half[k]);
    (void)half_increment;
    GreenEstimate& e = out[k];
    e.method = GreenMethod::resolvent;
    e.value = std::max(value, 0.0);
    e.error = increment + std::abs(value - half_value);
    e.params = {{"grid", m}, {"mode", 1}, {"damping_levels", static_cast<double>(ns)}};
  }
  return out;
}

std::vector<GreenEstimate> resolvent_undamped(const ProcessSpec& spec, int i, const std::vector<GreenTarget>& targets,
                                              const ResolventOptions& opt, int m) {
  const int d = spec.dim();
  if (d < 2) throw PreconditionError("the undamped resolvent integral needs d >= 2");
  auto at = [&](const Eigen::VectorXd& theta) { return resolvent_of(fourier(spec, theta), 1.0); };
  const GridSums fine = grid_inverse_sums(d, m, 0.5, i, targets, at);
  const GridSums coarse = grid_inverse_sums(d, m / 2, 0.5, i, targets, at);
  const double count = static_cast<double>(grid_size(d, m));
  const double coarse_count = static_cast<double>(grid_size(d, m / 2));
  // Midpoint error near theta = 0 decays like M^{-(d-1)/2}.
  const double gain = 1.0 / (std::pow(2.0, 0.5 * (d - 1)) - 1.0);
  std::vector<GreenEstimate> out(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double v = fine.full[k].real() / count;
    const double w = coarse.full[k].real() / coarse_count;
    GreenEstimate& e = out[k];
    e.method = GreenMethod::resolvent;
    e.value = std::max(v + gain * (v - w), 0.0);
    e.error = gain * std::abs(v - w);
    e.converged = e.error <= opt.tolerance * std::abs(v) * 1e4;
    e.params = {{"grid", m}, {"mode", 2}};
  }
  return out;
}

struct RowSampler {
  std::vector<double> cumulative;
  std::vector<LatticeVector> step;
  std::vector<int> to;
};

std::vector<RowSampler> build_samplers(const ProcessSpec& spec) {
  std::vector<RowSampler> rows(static_cast<std::size_t>(spec.states()));
  for (int i = 0; i < spec.states(); ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (int j = 0; j < spec.states(); ++j)
      for (const auto& [x, mass] : spec.jump(i, j).atoms()) {
        acc += mass;
        r.cumulative.push_back(acc);
        r.step.push_back(x);
        r.to.push_back(j);
      }
    r.cumulative.back() = std::numeric_limits<double>::infinity();
  }
  return rows;
}

// Same tables flattened for the simulation inner loop.
struct FlatSampler {
  std::size_t d = 0;
  std::vector<std::size_t> row_begin;
  std::vector<double> cumulative;
  std::vector<std::int64_t> step;
  std::vector<int> to;

  explicit FlatSampler(const std::vector<RowSampler>& rows, std::size_t dim) : d(dim) {
    for (const auto& r : rows) {
      row_begin.push_back(cumulative.size());
      for (std::size_t k = 0; k < r.cumulative.size(); ++k) {
        cumulative.push_back(r.cumulative[k]);
        for (std::size_t a = 0; a < d; ++a) step.push_back(r.step[k][a]);
        to.push_back(r.to[k]);
      }
    }
    row_begin.push_back(cumulative.size());
  }

  [[nodiscard]] std::size_t pick(int layer, double u) const {
    const auto first = cumulative.begin() + static_cast<std::ptrdiff_t>(row_begin[static_cast<std::size_t>(layer)]);
    const auto last = cumulative.begin() + static_cast<std::ptrdiff_t>(row_begin[static_cast<std::size_t>(layer) + 1]);
    return static_cast<std::size_t>(std::upper_bound(first, last, u) - cumulative.begin());
  }
};

// SplitMix64 stream keyed by (seed, path): independent of scheduling.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path) : state_(mix(seed ^ mix(path + kGamma))) {}
  std::uint64_t operator()() { return mix(state_ += kGamma); }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

double uniform01(PathStream& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(const RowSampler& row, PathStream& rng) {
  const double u = uniform01(rng);
  return static_cast<std::size_t>(std::upper_bound(row.cumulative.begin(), row.cumulative.end(), u) -
                                  row.cumulative.begin());
}

}  // namespace

std::string to_string(GreenMethod m) {
  switch (m) {
    case GreenMethod::series: return "series";
    case GreenMethod::resolvent: return "resolvent";
    case GreenMethod::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

GreenMethod parse_green_method(const std::string& name) {
  if (name == "series") return GreenMethod::series;
  if (name == "resolvent") return GreenMethod::resolvent;
  if (name == "monte-carlo" || name == "mc") return GreenMethod::monte_carlo;
  throw PreconditionError("unknown Green method '" + name + "'");
}

std::string to_string(ResolventMode m) {
  switch (m) {
    case ResolventMode::tilted: return "tilted";
    case ResolventMode::damped: return "damped";
    case ResolventMode::undamped: return "undamped";
  }
  return "unknown";
}

ResolventMode parse_resolvent_mode(const std::string& name) {
  if (name == "tilted") return ResolventMode::tilted;
  if (name == "damped") return ResolventMode::damped;
  if (name == "undamped") return ResolventMode::undamped;
  throw PreconditionError("unknown resolvent mode '" + name + "'");
}

std::vector<GreenEstimate> green_series_batch(const ProcessSpec& spec, int i, const std::vector<GreenTarget>& targets,
                                              const SeriesOptions& options, const LatticeVector& source) {
  check_targets(spec, i, targets);
  require_transient(spec);
  if (options.horizon < 0) throw PreconditionError("series horizon must be non-negative");
  const LatticeVector start = source.dim() == 0 ? LatticeVector::zero(static_cast<std::size_t>(spec.dim())) : source;
  if (start.dim() != static_cast<std::size_t>(spec.dim())) throw PreconditionError("source has the wrong dimension");

  const std::size_t nt = targets.size();
  constexpr std::size_t kWindow = 11;
  std::vector<double> sums(nt, 0.0);
  std::vector<std::vector<double>> history(nt);
  // Steps before which a target cannot have been reached yet.
  std::vector<std::int64_t> first_reach(nt);
  const std::int64_t reach = std::max<std::int64_t>(1, spec.max_jump_sup());
  for (std::size_t t = 0; t < nt; ++t) first_reach[t] = sup_distance(start.coords, targets[t].x) / reach;

  detail::LayeredLaw law(spec, i, start);
  double discarded = 0.0;
  int steps = 0;
  for (int n = 0; n <= options.horizon; ++n) {
    if (n > 0) {
      law.step();
      discarded += law.prune(options.prune);
    }
    steps = n;
    for (std::size_t t = 0; t < nt; ++t) {
      const double term = law.mass_at(targets[t].x, targets[t].j);
      sums[t] += term;
      auto& h = history[t];
      h.push_back(term);
      if (h.size() > kWindow) h.erase(h.begin());
    }
    if (options.tolerance > 0.0 && n >= static_cast<int>(kWindow)) {
      bool all_done = true;
      for (std::size_t t = 0; t < nt && all_done; ++t)
        all_done = n > first_reach[t] + static_cast<std::int64_t>(kWindow) && geometric_tail(history[t]) <= options.tolerance;
      if (all_done) break;
    }
    bool empty = true;
    for (int j = 0; j < spec.states(); ++j) empty = empty && law.layer(j).empty();
    if (empty) break;
  }

  std::vector<GreenEstimate> out(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& h = history[t];
    double tail = h.size() < kWindow ? std::numeric_limits<double>::infinity() : geometric_tail(h);
    if (steps <= first_reach[t]) tail = std::numeric_limits<double>::infinity();
    bool exhausted = true;
    for (int j = 0; j < spec.states(); ++j) exhausted = exhausted && law.layer(j).empty();
    if (exhausted) tail = 0.0;
    GreenEstimate& e = out[t];
    e.method = GreenMethod::series;
    e.value = sums[t];
    e.error = tail + discarded * (1.0 + sums[t]) + 1e-13 * sums[t];
    e.converged = std::isfinite(tail) && (options.tolerance <= 0.0 || tail <= options.tolerance);
    e.params = {{"horizon", options.horizon}, {"steps", steps}, {"tail", tail}, {"pruned_mass", discarded}};
  }
  return out;
}

GreenEstimate green_series(const ProcessSpec& spec, int i, const LatticeVector& x, int j, const SeriesOptions& options) {
  return green_series_batch(spec, i, {GreenTarget{x, j}}, options).front();
}

std::vector<GreenEstimate> green_resolvent_batch(const ProcessSpec& spec, int i, const std::vector<GreenTarget>& targets,
                                                 const ResolventOptions& options) {
  check_targets(spec, i, targets);
  require_transient(spec);
  const int m = options.grid > 0 ? options.grid : default_grid(spec.dim());
  if (m < 4 || m % 2 != 0) throw PreconditionError("resolvent grid size must be even and at least 4");
  switch (options.mode) {
    case ResolventMode::tilted: return resolvent_tilted(spec, i, targets, options, m);
    case ResolventMode::damped: return resolvent_damped(spec, i, targets, options, m);
    case ResolventMode::undamped: return resolvent_undamped(spec, i, targets, options, m);
  }
  return {};
}

GreenEstimate green_resolvent(const ProcessSpec& spec, int i, const LatticeVector& x, int j,
                              const ResolventOptions& options) {
  return green_resolvent_batch(spec, i, {GreenTarget{x, j}}, options).front();
}

std::vector<GreenEstimate> green_mc_batch(const ProcessSpec& spec, int i, const std::vector<GreenTarget>& targets,
                                          const McOptions& options) {
  check_targets(spec, i, targets);
  if (options.paths < 2) throw PreconditionError("Monte-Carlo needs at least 2 paths");
  if (options.horizon < 0) throw PreconditionError("Monte-Carlo horizon must be non-negative");
  const std::size_t nt = targets.size();
  const std::size_t d = static_cast<std::size_t>(spec.dim());
  const FlatSampler sampler(build_samplers(spec), d);
  const std::int64_t reach = spec.max_jump_sup();
  std::vector<std::int64_t> goal;
  for (const auto& t : targets) goal.insert(goal.end(), t.x.coords.begin(), t.x.coords.end());

  const std::int64_t chunks = (options.paths + kMcChunk - 1) / kMcChunk;
  struct Partial {
    std::vector<double> sum;
    std::vector<double> sumsq;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(chunks));
  detail::parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    Partial& part = partials[c];
    part.sum.assign(nt, 0.0);
    part.sumsq.assign(nt, 0.0);
    std::vector<std::int64_t> counts(nt);
    std::vector<std::int64_t> pos(d);
    const std::int64_t first = static_cast<std::int64_t>(c) * kMcChunk;
    const std::int64_t last = std::min(options.paths, first + kMcChunk);
    for (std::int64_t path = first; path < last; ++path) {
      PathStream rng(options.seed, static_cast<std::uint64_t>(path));
      std::fill(pos.begin(), pos.end(), 0);
      std::fill(counts.begin(), counts.end(), 0);
      int layer = i;
      for (int n = 0;; ++n) {
        // Stop once no target can be reached in the remaining steps.
        const std::int64_t budget = static_cast<std::int64_t>(options.horizon - n) * reach;
        bool reachable = false;
        for (std::size_t t = 0; t < nt; ++t) {
          std::int64_t dist = 0;
          for (std::size_t a = 0; a < d; ++a) dist = std::max(dist, std::abs(pos[a] - goal[t * d + a]));
          if (dist == 0 && layer == targets[t].j) ++counts[t];
          reachable = reachable || dist <= budget;
        }
        if (n == options.horizon || !reachable) break;
        const std::size_t k = sampler.pick(layer, uniform01(rng));
        for (std::size_t a = 0; a < d; ++a) pos[a] += sampler.step[k * d + a];
        layer = sampler.to[k];
      }
      for (std::size_t t = 0; t < nt; ++t) {
        const double v = static_cast<double>(counts[t]);
        part.sum[t] += v;
        part.sumsq[t] += v * v;
      }
    }
  });

  std::vector<double> sum(nt, 0.0);
  std::vector<double> sumsq(nt, 0.0);
  for (const auto& part : partials)
    for (std::size_t t = 0; t < nt; ++t) {
      sum[t] += part.sum[t];
      sumsq[t] += part.sumsq[t];
    }
  const double n = static_cast<double>(options.paths);
  std::vector<GreenEstimate> out(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const double mean = sum[t] / n;
    const double var = std::max(0.0, (sumsq[t] - n * mean * mean) / (n - 1.0));
    GreenEstimate& e = out[t];
    e.method = GreenMethod::monte_carlo;
    e.value = mean;
    e.error = std::sqrt(var / n);
    e.params = {{"paths", n}, {"horizon", options.horizon}, {"seed", static_cast<double>(options.seed)}};
  }
  return out;
}

GreenEstimate green_mc(const ProcessSpec& spec, int i, const LatticeVector& x, int j, const McOptions& options) {
  return green_mc_batch(spec, i, {GreenTarget{x, j}}, options).front();
}

std::vector<PathPoint> simulate_path(const ProcessSpec& spec, int i, int steps, std::uint64_t seed) {
  check_state(spec, i, "source");
  if (steps < 0) throw PreconditionError("path length must be non-negative");
  const std::vector<RowSampler> rows = build_samplers(spec);
  PathStream rng(seed, 0);
  std::vector<PathPoint> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back({LatticeVector::zero(static_cast<std::size_t>(spec.dim())), i});
  for (int n = 0; n < steps; ++n) {
    const auto& row = rows[static_cast<std::size_t>(path.back().state)];
    const std::size_t k = sample_index(row, rng);
    path.push_back({path.back().x + row.step[k], row.to[k]});
  }
  return path;
}

Eigen::MatrixXd rotation_to_e1(const Eigen::VectorXd& u) {
  const Eigen::Index d = u.size();
  if (std::abs(u.norm() - 1.0) > 1e-12) throw PreconditionError("direction must be a unit vector");
  if (d == 1) return Eigen::MatrixXd::Constant(1, 1, u[0]);
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(d, 0);
  const double cos_a = u.dot(e1);
  Eigen::VectorXd v = e1 - cos_a * u;
  const double sin_a = v.norm();
  if (sin_a < 1e-15) {
    if (cos_a > 0) return Eigen::MatrixXd::Identity(d, d);
    // u = -e1: reflection through the hyperplane orthogonal to e1.
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
    r(0, 0) = -1.0;
    return r;
  }
  v /= sin_a;
  return Eigen::MatrixXd::Identity(d, d) + (cos_a - 1.0) * (u * u.transpose() + v * v.transpose()) +
         sin_a * (v * u.transpose() - u * v.transpose());
}

AsymptoticCoefficient asymptotic_coefficient(const ProcessSpec& spec, const Eigen::VectorXd& u,
                                             const AsymptoticOptions& options) {
  const int d = spec.dim();
  const int p = spec.states();
  AsymptoticCoefficient out;
  out.m_exponent = std::isnan(options.m_exponent) ? default_m_exponent(d) : options.m_exponent;
  const BoundaryPoint bp = boundary_point(spec, u, options.boundary);
  const DoobTransform doob = doob_transform(spec, bp.c);
  out.u = u;
  out.c = bp.c;
  out.m_c_norm = bp.m_c.norm();
  out.phi = doob.phi;
  out.rotation = rotation_to_e1(u);
  out.sigma_u = out.rotation * energy_matrix(doob.transformed).sigma * out.rotation.transpose();
  out.sigma_u_1 = out.sigma_u.bottomRightCorner(d - 1, d - 1);
  double det = 1.0;
  if (d > 1) {
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (out.sigma_u_1 + out.sigma_u_1.transpose()));
    if (llt.info() != Eigen::Success) throw NumericError("transverse energy matrix is degenerate");
    det = llt.matrixL().toDenseMatrix().diagonal().prod();
    det *= det;
  }
  const Eigen::RowVectorXd pi_c = stationary_distribution(doob.transformed);
  out.proj0 = Eigen::VectorXd::Ones(p) * pi_c;
  out.chi.resize(p, p);
  const double front = std::pow(kTwoPi, -(d - 1) / 2.0) * std::pow(out.m_c_norm, out.m_exponent) / std::sqrt(det);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out.chi(i, j) = front * out.phi[i] / out.phi[j] * out.proj0(i, j);
  return out;
}

double asymptotic_green(const ProcessSpec& spec, int i, const LatticeVector& x, int j, const AsymptoticOptions& options) {
  check_state(spec, i, "source");
  check_state(spec, j, "target");
  const Eigen::VectorXd xr = x.to_real();
  if (xr.size() != spec.dim()) throw PreconditionError("target has the wrong dimension");
  const double norm = xr.norm();
  if (norm == 0.0) throw PreconditionError("asymptotic equivalent needs x != 0");
  const AsymptoticCoefficient a = asymptotic_coefficient(spec, xr / norm, options);
  return a.chi(i, j) * std::pow(norm, -(spec.dim() - 1) / 2.0) * std::exp(-a.c.dot(xr));
}

LatticeVector nearest_lattice_point(const Eigen::VectorXd& v) {
  std::vector<std::int64_t> c(static_cast<std::size_t>(v.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) c[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(v[k] + 0.5));
  return LatticeVector(std::move(c));
}

double doob_conjugation_residual(const ProcessSpec& spec, const Eigen::VectorXd& c, int i,
                                 const std::vector<GreenTarget>& targets, const SeriesOptions& options) {
  const DoobTransform doob = doob_transform(spec, c);
  const auto base = green_series_batch(spec, i, targets, options);
  const auto tilted = green_series_batch(doob.transformed, i, targets, options);
  double worst = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const int j = targets[t].j;
    const double conj = doob.phi[j] / doob.phi[i] * std::exp(dot(targets[t].x, c)) * base[t].value;
    worst = std::max(worst, std::abs(tilted[t].value - conj));
  }
  return worst;
}

CompareReport compare(const ProcessSpec& spec, const Eigen::VectorXd& u, const std::vector<double>& radii, int i, int j,
                      const CompareOptions& options) {
  CompareReport report;
  report.coefficient = asymptotic_coefficient(spec, u, options.asymptotic);
  std::vector<GreenTarget> targets;
  for (double r : radii) {
    if (!(r > 0.0)) throw PreconditionError("radii must be positive");
    targets.push_back({nearest_lattice_point(r * u), j});
    if (targets.back().x.norm() == 0.0) throw PreconditionError("radius rounds to the origin");
  }
  std::vector<double> asym(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) asym[k] = asymptotic_green(spec, i, targets[k].x, j, options.asymptotic);

  for (GreenMethod method : options.methods) {
    std::vector<GreenEstimate> est;
    switch (method) {
      case GreenMethod::series: est = green_series_batch(spec, i, targets, options.series); break;
      case GreenMethod::resolvent: est = green_resolvent_batch(spec, i, targets, options.resolvent); break;
      case GreenMethod::monte_carlo: est = green_mc_batch(spec, i, targets, options.mc); break;
    }
    for (std::size_t k = 0; k < targets.size(); ++k)
      report.rows.push_back({radii[k], targets[k].x, method, est[k].value, est[k].error, asym[k], est[k].value / asym[k]});
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const CompareRow& a, const CompareRow& b) { return a.r < b.r; });
  if (options.doob_residual) report.doob_residual = doob_conjugation_residual(spec, report.coefficient.c, i, targets, options.series);
  return report;
}

}  // namespace madd
