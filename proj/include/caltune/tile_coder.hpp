#ifndef CALTUNE_TILE_CODER_HPP
#define CALTUNE_TILE_CODER_HPP

#include <cstdint>
#include <vector>

#include "caltune/common.hpp"

namespace caltune {

/// Tile coding of continuous states into sparse binary feature indices.
/// Exact table (no hashing): table_size = num_tilings * tiles_per_dim^dims.
/// Tilings are displaced asymmetrically, using odd multiples of the unit
/// offset per dimension to reduce aliasing. Immutable after construction.
class TileCoder {
 public:
  TileCoder(int num_tilings, int tiles_per_dim, std::vector<double> lo, std::vector<double> hi);

  int num_tilings() const { return num_tilings_; }
  int tiles_per_dim() const { return tiles_per_dim_; }
  int dims() const { return dims_; }
  int64_t table_size() const { return table_size_; }

  /// Exactly num_tilings distinct active indices, sorted ascending.
  /// Out-of-bounds states are clipped to the declared bounds.
  void encode(const StateVec& state, std::vector<int32_t>* out) const;
  std::vector<int32_t> encode(const StateVec& state) const;

 private:
  int num_tilings_;
  int tiles_per_dim_;
  int dims_;
  int64_t tiling_stride_;
  int64_t table_size_;
  std::vector<double> lo_, inv_unit_;
  // offsets_[tiling * dims + d], as a fraction of one tile width in [0, 1)
  std::vector<double> offsets_;
};

}  // namespace caltune

#endif
