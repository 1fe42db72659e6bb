#include "caltune/common.hpp"

namespace caltune {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ArgumentError("percentile: empty input");
  if (p < 0.0 || p > 100.0) throw ArgumentError("percentile: p out of [0, 100]");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  size_t lo = static_cast<size_t>(rank);
  size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace caltune
