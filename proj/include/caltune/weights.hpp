#ifndef CALTUNE_WEIGHTS_HPP
#define CALTUNE_WEIGHTS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "caltune/common.hpp"
#include "caltune/rng.hpp"

namespace caltune {

struct AdamScalar {
  double m = 0.0;
  double v = 0.0;
  double dw = 0.0;
};

/// One Adam step for a single coordinate: m' = b1*m + (1-b1)*g,
/// v' = b2*v + (1-b2)*g^2, with bias correction by (1 - b^t) and
/// dw = -alpha * mhat / (sqrt(vhat) + eps).
inline AdamScalar adam_update(double m, double v, double g, int64_t t, double alpha, double beta1,
                              double beta2 = 0.999, double eps = 1e-8) {
  if (t < 1) throw ArgumentError("adam_update: t must be >= 1");
  AdamScalar r;
  r.m = beta1 * m + (1.0 - beta1) * g;
  r.v = beta2 * v + (1.0 - beta2) * g * g;
  double mhat = r.m / (1.0 - std::pow(beta1, static_cast<double>(t)));
  double vhat = r.v / (1.0 - std::pow(beta2, static_cast<double>(t)));
  r.dw = -alpha * mhat / (std::sqrt(vhat) + eps);
  return r;
}

/// Vector form; m, v, w updated in place.
void adam_update(std::vector<double>& m, std::vector<double>& v, const std::vector<double>& g,
                 int64_t t, double alpha, double beta1, std::vector<double>& w,
                 double beta2 = 0.999, double eps = 1e-8);

/// Open-addressing hash map from non-negative int64 keys to a small value
/// type. No erase; values never move once inserted (stored out-of-line).
class SlotIndex {
 public:
  explicit SlotIndex(size_t expected = 1024) { rehash(round_up(expected * 2)); }

  int32_t find(int64_t key) const {
    size_t mask = table_.size() - 1;
    size_t i = static_cast<size_t>(mix64(static_cast<uint64_t>(key))) & mask;
    while (true) {
      const Cell& c = table_[i];
      if (c.key == kEmpty) return -1;
      if (c.key == key) return c.slot;
      i = (i + 1) & mask;
    }
  }

  /// Returns the slot for key, assigning the next slot id on first sight.
  int32_t find_or_insert(int64_t key, bool* created) {
    if ((count_ + 1) * 10 >= table_.size() * 7) rehash(table_.size() * 2);
    size_t mask = table_.size() - 1;
    size_t i = static_cast<size_t>(mix64(static_cast<uint64_t>(key))) & mask;
    while (true) {
      Cell& c = table_[i];
      if (c.key == kEmpty) {
        c.key = key;
        c.slot = static_cast<int32_t>(count_);
        ++count_;
        *created = true;
        return c.slot;
      }
      if (c.key == key) {
        *created = false;
        return c.slot;
      }
      i = (i + 1) & mask;
    }
  }

  size_t size() const { return count_; }

 private:
  static constexpr int64_t kEmpty = -1;
  struct Cell {
    int64_t key = kEmpty;
    int32_t slot = 0;
  };

  static size_t round_up(size_t n) {
    size_t p = 64;
    while (p < n) p *= 2;
    return p;
  }

  void rehash(size_t cap) {
    std::vector<Cell> old = std::move(table_);
    table_.assign(cap, Cell{});
    size_t mask = cap - 1;
    for (const Cell& c : old) {
      if (c.key == kEmpty) continue;
      size_t i = static_cast<size_t>(mix64(static_cast<uint64_t>(c.key))) & mask;
      while (table_[i].key != kEmpty) i = (i + 1) & mask;
      table_[i] = c;
    }
  }

  std::vector<Cell> table_;
  size_t count_ = 0;
};

/// Adam-optimized weight vector stored sparsely, with exact dense semantics.
///
/// The conceptual object is a dense vector of `size` weights, all initialized
/// to `init_value`, updated by Adam every step on a (mostly zero) gradient.
/// Coordinates whose gradient has been zero since the last touch owe only
/// deterministic decay steps; those are replayed on demand, so the stored
/// state is always equal to what the dense program would hold. Coordinates
/// never touched by a gradient have m = v = 0 and therefore never move.
class SparseAdamWeights {
 public:
  SparseAdamWeights(int64_t size, double init_value, double alpha, double beta1,
                    double beta2 = 0.999, double eps = 1e-8)
      : size_(size),
        init_(init_value),
        alpha_(alpha),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {
    pow_b1_.push_back(1.0);
    pow_b2_.push_back(1.0);
  }

  int64_t size() const { return size_; }
  int64_t step_count() const { return t_; }
  double init_value() const { return init_; }

  /// Advances the global step counter; call once per learning step, after
  /// reading any values that should reflect the previous step's weights.
  void begin_step() {
    ++t_;
    pow_b1_.push_back(pow_b1_.back() * beta1_);
    pow_b2_.push_back(pow_b2_.back() * beta2_);
  }

  struct Rec {
    double w;
    double m = 0.0;
    double v = 0.0;
    int64_t last_t = 0;
    int32_t trace_pos = -1;  // used by AccumulatingTrace
  };

  /// Slot handles are stable for the lifetime of the store.
  int32_t slot_for(int64_t index) {
    bool created = false;
    int32_t s = index_.find_or_insert(index, &created);
    if (created) {
      recs_.push_back(Rec{init_});
      keys_.push_back(index);
    }
    return s;
  }

  Rec& rec(int32_t slot) { return recs_[static_cast<size_t>(slot)]; }
  int64_t key_of(int32_t slot) const { return keys_[static_cast<size_t>(slot)]; }

  /// Current weight value; does not materialize untouched coordinates.
  double read(int64_t index) {
    int32_t s = index_.find(index);
    if (s < 0) return init_;
    Rec& r = recs_[static_cast<size_t>(s)];
    sync(r, t_);
    return r.w;
  }

  double read_slot(int32_t slot) {
    Rec& r = recs_[static_cast<size_t>(slot)];
    sync(r, t_);
    return r.w;
  }

  /// Applies a (nonzero) gradient for the current step.
  void grad_slot(int32_t slot, double g) {
    Rec& r = recs_[static_cast<size_t>(slot)];
    sync(r, t_ - 1);
    r.m = beta1_ * r.m + (1.0 - beta1_) * g;
    r.v = beta2_ * r.v + (1.0 - beta2_) * g * g;
    double mhat = r.m / (1.0 - pow_b1_[static_cast<size_t>(t_)]);
    double vhat = r.v / (1.0 - pow_b2_[static_cast<size_t>(t_)]);
    r.w -= alpha_ * mhat / (std::sqrt(vhat) + eps_);
    r.last_t = t_;
  }

  size_t touched_count() const { return recs_.size(); }

  /// Synced copy of every materialized coordinate, as (index, weight) pairs.
  std::vector<std::pair<int64_t, double>> snapshot();

 private:
  void sync(Rec& r, int64_t target) {
    if (r.last_t >= target) return;
    if (r.m == 0.0) {
      if (r.v != 0.0)
        r.v *= std::pow(beta2_, static_cast<double>(target - r.last_t));
      r.last_t = target;
      return;
    }
    for (int64_t s = r.last_t + 1; s <= target; ++s) {
      r.m *= beta1_;
      r.v *= beta2_;
      double mhat = r.m / (1.0 - pow_b1_[static_cast<size_t>(s)]);
      double vhat = r.v / (1.0 - pow_b2_[static_cast<size_t>(s)]);
      double dw = -alpha_ * mhat / (std::sqrt(vhat) + eps_);
      r.w += dw;
      if (std::abs(dw) < 1e-18 * (1.0 + std::abs(r.w))) {
        // The remaining terms shrink geometrically (ratio beta1/sqrt(beta2))
        // and are already below the resolution of w.
        double rem = static_cast<double>(target - s);
        r.m *= std::pow(beta1_, rem);
        r.v *= std::pow(beta2_, rem);
        break;
      }
    }
    r.last_t = target;
  }

  int64_t size_;
  double init_;
  double alpha_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  SlotIndex index_;
  std::vector<Rec> recs_;
  std::vector<int64_t> keys_;  // index of each slot, parallel to recs_
  std::vector<double> pow_b1_, pow_b2_;
};

/// Accumulating eligibility trace over weight-store slots. Entries store
/// values relative to a running scale so that uniform decay is O(1); a drop
/// threshold bounds the support.
class AccumulatingTrace {
 public:
  AccumulatingTrace(SparseAdamWeights* store, double drop_eps = 1e-8)
      : store_(store), drop_eps_(drop_eps) {}

  void clear() {
    for (const Entry& e : entries_) store_->rec(e.slot).trace_pos = -1;
    entries_.clear();
    scale_ = 1.0;
  }

  void decay(double factor) {
    if (factor == 0.0) {
      clear();
      return;
    }
    scale_ *= factor;
    if (scale_ < 1e-120) {
      for (Entry& e : entries_) e.value *= scale_;
      scale_ = 1.0;
    }
  }

  void add(int64_t index, double amount) {
    int32_t slot = store_->slot_for(index);
    auto& rec = store_->rec(slot);
    if (rec.trace_pos >= 0) {
      entries_[static_cast<size_t>(rec.trace_pos)].value += amount / scale_;
    } else {
      rec.trace_pos = static_cast<int32_t>(entries_.size());
      entries_.push_back(Entry{slot, amount / scale_});
    }
  }

  /// Applies gradient g = -delta * z to every live entry and drops entries
  /// below the threshold.
  void apply_td_gradient(double delta) {
    size_t i = 0;
    while (i < entries_.size()) {
      Entry& e = entries_[i];
      double z = e.value * scale_;
      if (std::abs(z) < drop_eps_) {
        store_->rec(e.slot).trace_pos = -1;
        e = entries_.back();
        if (i < entries_.size() - 1) store_->rec(e.slot).trace_pos = static_cast<int32_t>(i);
        entries_.pop_back();
        continue;
      }
      store_->grad_slot(e.slot, -delta * z);
      ++i;
    }
  }

  size_t support() const { return entries_.size(); }
  double value_at(int64_t index) const;

 private:
  struct Entry {
    int32_t slot;
    double value;
  };

  SparseAdamWeights* store_;
  double drop_eps_;
  double scale_ = 1.0;
  std::vector<Entry> entries_;
};

/// Plain sparse vector with SGD updates; used by the actor-critic learner.
class SparseVector {
 public:
  explicit SparseVector(double init = 0.0) : init_(init) {}

  double read(int64_t index) const {
    int32_t s = index_.find(index);
    return s < 0 ? init_ : vals_[static_cast<size_t>(s)];
  }

  void add(int64_t index, double amount) {
    bool created = false;
    int32_t s = index_.find_or_insert(index, &created);
    if (created) vals_.push_back(init_);
    vals_[static_cast<size_t>(s)] += amount;
  }

  size_t touched_count() const { return vals_.size(); }

 private:
  double init_;
  SlotIndex index_;
  std::vector<double> vals_;
};

}  // namespace caltune

#endif
