#include "caltune/tile_coder.hpp"

#include <cmath>

namespace caltune {

TileCoder::TileCoder(int num_tilings, int tiles_per_dim, std::vector<double> lo,
                     std::vector<double> hi)
    : num_tilings_(num_tilings),
      tiles_per_dim_(tiles_per_dim),
      dims_(static_cast<int>(lo.size())),
      lo_(std::move(lo)) {
  if (num_tilings_ < 1) throw ArgumentError("TileCoder: num_tilings must be >= 1");
  if (tiles_per_dim_ < 1) throw ArgumentError("TileCoder: tiles_per_dim must be >= 1");
  if (hi.size() != lo_.size() || dims_ == 0)
    throw ArgumentError("TileCoder: bounds dimension mismatch");

  inv_unit_.resize(static_cast<size_t>(dims_));
  for (int d = 0; d < dims_; ++d) {
    double width = hi[static_cast<size_t>(d)] - lo_[static_cast<size_t>(d)];
    if (width <= 0.0) throw ArgumentError("TileCoder: bounds must satisfy lo < hi");
    inv_unit_[static_cast<size_t>(d)] = static_cast<double>(tiles_per_dim_) / width;
  }

  tiling_stride_ = 1;
  for (int d = 0; d < dims_; ++d) tiling_stride_ *= tiles_per_dim_;
  table_size_ = tiling_stride_ * num_tilings_;

  offsets_.resize(static_cast<size_t>(num_tilings_ * dims_));
  for (int t = 0; t < num_tilings_; ++t) {
    for (int d = 0; d < dims_; ++d) {
      double o = static_cast<double>(t * (2 * d + 1)) / static_cast<double>(num_tilings_);
      offsets_[static_cast<size_t>(t * dims_ + d)] = o - std::floor(o);
    }
  }
}

void TileCoder::encode(const StateVec& state, std::vector<int32_t>* out) const {
  out->clear();
  out->reserve(static_cast<size_t>(num_tilings_));
  double scaled[StateVec::kMaxDim];
  for (int d = 0; d < dims_; ++d) {
    double u = (state[d] - lo_[static_cast<size_t>(d)]) * inv_unit_[static_cast<size_t>(d)];
    scaled[d] = std::clamp(u, 0.0, static_cast<double>(tiles_per_dim_));
  }
  for (int t = 0; t < num_tilings_; ++t) {
    int64_t idx = 0;
    const double* off = &offsets_[static_cast<size_t>(t * dims_)];
    for (int d = 0; d < dims_; ++d) {
      int cell = static_cast<int>(scaled[d] + off[d]);
      if (cell >= tiles_per_dim_) cell = tiles_per_dim_ - 1;
      idx = idx * tiles_per_dim_ + cell;
    }
    out->push_back(static_cast<int32_t>(idx + static_cast<int64_t>(t) * tiling_stride_));
  }
  // Tiling blocks are disjoint, so indices are already sorted and distinct.
}

std::vector<int32_t> TileCoder::encode(const StateVec& state) const {
  std::vector<int32_t> out;
  encode(state, &out);
  return out;
}

}  // namespace caltune
