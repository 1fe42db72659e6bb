#include "caltune/weights.hpp"

namespace caltune {

void adam_update(std::vector<double>& m, std::vector<double>& v, const std::vector<double>& g,
                 int64_t t, double alpha, double beta1, std::vector<double>& w, double beta2,
                 double eps) {
  if (m.size() != v.size() || m.size() != g.size() || m.size() != w.size())
    throw ArgumentError("adam_update: shape mismatch");
  if (t < 1) throw ArgumentError("adam_update: t must be >= 1");
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < m.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    w[i] -= alpha * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

std::vector<std::pair<int64_t, double>> SparseAdamWeights::snapshot() {
  std::vector<std::pair<int64_t, double>> out;
  out.reserve(recs_.size());
  for (size_t i = 0; i < recs_.size(); ++i) {
    sync(recs_[i], t_);
    out.emplace_back(keys_[i], recs_[i].w);
  }
  return out;
}

double AccumulatingTrace::value_at(int64_t index) const {
  for (const Entry& e : entries_) {
    // entries reference store slots; match through the store's key list
    if (store_->key_of(e.slot) == index) return e.value * scale_;
  }
  return 0.0;
}

}  // namespace caltune
