#include "lattice_field.hpp"

#include <algorithm>
#include <limits>

#include "madd/errors.hpp"

namespace madd::detail {

namespace {

constexpr std::size_t kMaxCells = std::size_t{1} << 28;

std::size_t volume(const std::vector<std::int64_t>& extent) {
  std::size_t v = 1;
  for (auto e : extent) {
    if (e <= 0) return 0;
    v *= static_cast<std::size_t>(e);
    if (v > kMaxCells) throw ResourceError("lattice field exceeds the cell budget");
  }
  return v;
}

}  // namespace

LatticeField::LatticeField(std::vector<std::int64_t> lo, std::vector<std::int64_t> extent)
    : lo_(std::move(lo)), extent_(std::move(extent)), data_(volume(extent_), 0.0) {}

LatticeField LatticeField::delta(const LatticeVector& x, double mass) {
  LatticeField f(x.coords, std::vector<std::int64_t>(x.dim(), 1));
  f.data_[0] = mass;
  return f;
}

bool LatticeField::contains(const LatticeVector& x) const {
  if (data_.empty()) return false;
  for (std::size_t k = 0; k < lo_.size(); ++k)
    if (x[k] < lo_[k] || x[k] >= lo_[k] + extent_[k]) return false;
  return true;
}

double LatticeField::at(const LatticeVector& x) const { return contains(x) ? data_[index_of(x.coords)] : 0.0; }

double LatticeField::total() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

std::size_t LatticeField::index_of(const std::vector<std::int64_t>& coord) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < lo_.size(); ++k) idx = idx * static_cast<std::size_t>(extent_[k]) + static_cast<std::size_t>(coord[k] - lo_[k]);
  return idx;
}

void LatticeField::advance(std::vector<std::int64_t>& coord) const {
  for (std::size_t k = lo_.size(); k-- > 0;) {
    if (++coord[k] < lo_[k] + extent_[k]) return;
    coord[k] = lo_[k];
  }
}

void LatticeField::ensure_box(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi_exclusive) {
  const std::size_t d = lo.size();
  if (data_.empty()) {
    lo_ = lo;
    extent_.resize(d);
    for (std::size_t k = 0; k < d; ++k) extent_[k] = hi_exclusive[k] - lo[k];
    data_.assign(volume(extent_), 0.0);
    return;
  }
  std::vector<std::int64_t> new_lo(d);
  std::vector<std::int64_t> new_extent(d);
  bool grow = false;
  for (std::size_t k = 0; k < d; ++k) {
    new_lo[k] = std::min(lo_[k], lo[k]);
    const std::int64_t hi = std::max(lo_[k] + extent_[k], hi_exclusive[k]);
    new_extent[k] = hi - new_lo[k];
    grow = grow || new_lo[k] != lo_[k] || new_extent[k] != extent_[k];
  }
  if (!grow) return;
  LatticeField bigger(new_lo, new_extent);
  std::vector<std::int64_t> coord(lo_);
  for (std::size_t idx = 0; idx < data_.size(); ++idx) {
    if (data_[idx] != 0.0) bigger.data_[bigger.index_of(coord)] = data_[idx];
    advance(coord);
  }
  *this = std::move(bigger);
}

void LatticeField::convolve_into(const JumpMeasure& mu, LatticeField& out) const {
  if (data_.empty() || mu.empty()) return;
  const std::size_t d = lo_.size();
  std::vector<std::int64_t> amin(d, std::numeric_limits<std::int64_t>::max());
  std::vector<std::int64_t> amax(d, std::numeric_limits<std::int64_t>::min());
  for (const auto& [x, mass] : mu.atoms()) {
    for (std::size_t k = 0; k < d; ++k) {
      amin[k] = std::min(amin[k], x[k]);
      amax[k] = std::max(amax[k], x[k]);
    }
  }
  std::vector<std::int64_t> lo(d);
  std::vector<std::int64_t> hi(d);
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] = lo_[k] + amin[k];
    hi[k] = lo_[k] + extent_[k] + amax[k];
  }
  out.ensure_box(lo, hi);

  // Linear offset of each atom in the output layout.
  std::vector<std::int64_t> stride(d);
  std::int64_t s = 1;
  for (std::size_t k = d; k-- > 0;) {
    stride[k] = s;
    s *= out.extent_[k];
  }
  std::vector<std::pair<std::int64_t, double>> offsets;
  offsets.reserve(mu.size());
  for (const auto& [x, mass] : mu.atoms()) {
    std::int64_t off = 0;
    for (std::size_t k = 0; k < d; ++k) off += x[k] * stride[k];
    offsets.emplace_back(off, mass);
  }

  std::vector<std::int64_t> coord(lo_);
  for (std::size_t idx = 0; idx < data_.size(); ++idx) {
    const double v = data_[idx];
    if (v != 0.0) {
      std::int64_t base = 0;
      for (std::size_t k = 0; k < d; ++k) base += (coord[k] - out.lo_[k]) * stride[k];
      for (const auto& [off, mass] : offsets) out.data_[static_cast<std::size_t>(base + off)] += v * mass;
    }
    advance(coord);
  }
}

double LatticeField::prune(double threshold) {
  if (data_.empty()) return 0.0;
  const std::size_t d = lo_.size();
  double discarded = 0.0;
  std::vector<std::int64_t> lo(d, std::numeric_limits<std::int64_t>::max());
  std::vector<std::int64_t> hi(d, std::numeric_limits<std::int64_t>::min());
  bool any = false;
  std::vector<std::int64_t> coord(lo_);
  for (auto& v : data_) {
    if (v != 0.0 && v < threshold) {
      discarded += v;
      v = 0.0;
    }
    if (v != 0.0) {
      any = true;
      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = std::min(lo[k], coord[k]);
        hi[k] = std::max(hi[k], coord[k] + 1);
      }
    }
    advance(coord);
  }
  if (!any) {
    data_.clear();
    std::fill(extent_.begin(), extent_.end(), 0);
    return discarded;
  }
  bool shrink = false;
  for (std::size_t k = 0; k < d; ++k) shrink = shrink || lo[k] != lo_[k] || hi[k] != lo_[k] + extent_[k];
  if (shrink) {
    std::vector<std::int64_t> extent(d);
    for (std::size_t k = 0; k < d; ++k) extent[k] = hi[k] - lo[k];
    LatticeField smaller(lo, extent);
    for_each_nonzero([&](const std::vector<std::int64_t>& c, double v) { smaller.data_[smaller.index_of(c)] = v; });
    *this = std::move(smaller);
  }
  return discarded;
}

LayeredLaw::LayeredLaw(const ProcessSpec& spec, int start_state, const LatticeVector& start)
    : spec_(&spec), layers_(static_cast<std::size_t>(spec.states()), LatticeField(static_cast<std::size_t>(spec.dim()))) {
  layers_[static_cast<std::size_t>(start_state)] = LatticeField::delta(start, 1.0);
}

void LayeredLaw::step() {
  const int p = spec_->states();
  std::vector<LatticeField> next(static_cast<std::size_t>(p), LatticeField(static_cast<std::size_t>(spec_->dim())));
  for (int j = 0; j < p; ++j) {
    const auto& src = layers_[static_cast<std::size_t>(j)];
    if (src.empty()) continue;
    for (int k = 0; k < p; ++k) src.convolve_into(spec_->jump(j, k), next[static_cast<std::size_t>(k)]);
  }
  layers_ = std::move(next);
  ++steps_;
}

double LayeredLaw::prune(double threshold) {
  double discarded = 0.0;
  for (auto& f : layers_) discarded += f.prune(threshold);
  return discarded;
}

}  // namespace madd::detail
