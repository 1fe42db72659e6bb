#include <set>

#include "caltune/tile_coder.hpp"
#include "doctest.h"

using namespace caltune;

namespace {
int overlap(const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
  std::set<int32_t> sa(a.begin(), a.end());
  int n = 0;
  for (int32_t x : b) n += sa.count(x) ? 1 : 0;
  return n;
}
}  // namespace

TEST_CASE("encode returns exactly num_tilings distinct in-range indices") {
  TileCoder coder(16, 8, {-1, -1, -1, -1, -12.6, -28.3}, {1, 1, 1, 1, 12.6, 28.3});
  CHECK(coder.table_size() == 16LL * 8 * 8 * 8 * 8 * 8 * 8);
  StateVec s{0.2, -0.98, 0.5, 0.86, 3.0, -7.0};
  auto idx = coder.encode(s);
  CHECK(idx.size() == 16);
  std::set<int32_t> distinct(idx.begin(), idx.end());
  CHECK(distinct.size() == 16);
  for (int32_t i : idx) {
    CHECK(i >= 0);
    CHECK(i < coder.table_size());
  }
  CHECK(coder.encode(s) == idx);  // deterministic
}

TEST_CASE("out-of-bounds states are clipped") {
  TileCoder coder(4, 8, {0.0, 0.0}, {1.0, 1.0});
  auto inside = coder.encode(StateVec{1.0, 1.0});
  auto outside = coder.encode(StateVec{5.0, 99.0});
  CHECK(inside == outside);
}

TEST_CASE("1-D coder with 2 tilings and 4 tiles separates range endpoints") {
  TileCoder coder(2, 4, {0.0}, {1.0});
  auto a = coder.encode(StateVec{0.0});
  auto b = coder.encode(StateVec{1.0});
  CHECK(a.size() == 2);
  CHECK(overlap(a, b) == 0);
}

TEST_CASE("full overlap with itself, zero overlap across the box diagonal") {
  TileCoder coder(16, 8, {0.0, 0.0}, {1.0, 1.0});
  auto a = coder.encode(StateVec{0.0, 0.0});
  CHECK(overlap(a, a) == 16);
  auto b = coder.encode(StateVec{1.0, 1.0});
  CHECK(overlap(a, b) == 0);
}

TEST_CASE("overlap is non-increasing along an axis sweep") {
  TileCoder coder(8, 8, {0.0}, {1.0});
  auto base = coder.encode(StateVec{0.31});
  int prev = 8;
  for (int k = 0; k <= 40; ++k) {
    double x = 0.31 + k * (0.69 / 40.0);
    int ov = overlap(base, coder.encode(StateVec{x}));
    CHECK(ov <= prev);
    prev = ov;
  }
}

TEST_CASE("invalid construction arguments are rejected") {
  CHECK_THROWS_AS(TileCoder(0, 8, {0.0}, {1.0}), ArgumentError);
  CHECK_THROWS_AS(TileCoder(4, 8, {0.0}, {0.0}), ArgumentError);
  CHECK_THROWS_AS(TileCoder(4, 8, {0.0, 0.0}, {1.0}), ArgumentError);
}
