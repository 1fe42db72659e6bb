#ifndef CALTUNE_COMMON_HPP
#define CALTUNE_COMMON_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace caltune {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Small fixed-capacity state vector. All task states have dimension <= 6;
/// keeping them inline avoids heap churn in rollout loops.
class StateVec {
 public:
  static constexpr int kMaxDim = 6;

  StateVec() = default;
  explicit StateVec(int dim) : dim_(dim) {
    if (dim < 0 || dim > kMaxDim) throw ArgumentError("StateVec: bad dimension");
  }
  StateVec(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
    if (dim_ > kMaxDim) throw ArgumentError("StateVec: bad dimension");
    std::copy(xs.begin(), xs.end(), v_.begin());
  }

  int size() const { return dim_; }
  double& operator[](int i) { return v_[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v_[static_cast<size_t>(i)]; }
  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }
  const double* begin() const { return v_.data(); }
  const double* end() const { return v_.data() + dim_; }

  bool operator==(const StateVec& o) const {
    if (dim_ != o.dim_) return false;
    return std::memcmp(v_.data(), o.v_.data(), sizeof(double) * static_cast<size_t>(dim_)) == 0;
  }

  /// FNV-1a over the raw bytes; used for bit-exact de-duplication.
  uint64_t byte_hash() const {
    uint64_t h = 1469598103934665603ULL;
    const auto* p = reinterpret_cast<const unsigned char*>(v_.data());
    for (size_t i = 0; i < sizeof(double) * static_cast<size_t>(dim_); ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
    return h;
  }

 private:
  std::array<double, kMaxDim> v_{};
  int dim_ = 0;
};

inline double squared_distance(const StateVec& a, const StateVec& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Percentile with linear interpolation between order statistics:
/// rank = p * (n - 1), value = interpolation between floor and ceil ranks.
double percentile(std::vector<double> values, double p);

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Median as the 50th percentile (linear interpolation for even counts).
inline double median_of(std::vector<double> xs) { return percentile(std::move(xs), 50.0); }

inline double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace caltune

#endif
