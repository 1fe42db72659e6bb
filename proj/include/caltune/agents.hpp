#ifndef CALTUNE_AGENTS_HPP
#define CALTUNE_AGENTS_HPP

#include <functional>
#include <memory>
#include <vector>

#include "caltune/common.hpp"
#include "caltune/envs.hpp"
#include "caltune/hyperparams.hpp"
#include "caltune/rng.hpp"
#include "caltune/tile_coder.hpp"
#include "caltune/weights.hpp"

namespace caltune {

/// Softmax over action values with temperature tau, computed with
/// max-subtraction. Throws ArgumentError for tau <= 0.
std::vector<double> softmax_policy(const std::vector<double>& qvalues, double tau);

/// Samples an action index from a distribution by inverse CDF.
int sample_action(const std::vector<double>& probs, RandomStream& rng);

class OnlineAgent {
 public:
  virtual ~OnlineAgent() = default;
  /// Begins an episode at s (resets traces); returns the first action.
  virtual int start(const StateVec& s) = 0;
  /// Observes one transition and returns the action for the next state.
  virtual int step(double reward, const StateVec& next_state) = 0;
  /// Observes a terminal transition (bootstrap discount 0).
  virtual void finish(double reward) = 0;
  /// Called when the environment teleports without terminating.
  virtual void on_teleport() {}
};

/// Expected Sarsa(lambda) with linear tile-coded action values, softmax
/// policy and Adam. Optimistic initialization is spread over the weights as
/// optimistic_init / num_tilings so initial q(s,a) equals optimistic_init.
class ExpectedSarsaAgent : public OnlineAgent {
 public:
  ExpectedSarsaAgent(const TileCoder* coder, const EnvSpec& spec, const Hyperparams& hp,
                     uint64_t seed, double trace_drop_eps = 1e-8);

  int start(const StateVec& s) override;
  int step(double reward, const StateVec& next_state) override;
  void finish(double reward) override;
  void on_teleport() override;

  double q_value(const StateVec& s, int action);
  std::vector<double> q_values(const StateVec& s);
  SparseAdamWeights& weights() { return store_; }

  /// Frozen copy of the current greedy-side state: softmax policy over a
  /// weight snapshot.
  std::vector<std::pair<int64_t, double>> weight_snapshot() { return store_.snapshot(); }

 private:
  std::vector<double> q_from_features(const std::vector<int32_t>& feat);

  const TileCoder* coder_;
  EnvSpec spec_;
  Hyperparams hp_;
  RandomStream rng_;
  SparseAdamWeights store_;
  AccumulatingTrace trace_;
  std::vector<int32_t> feat_, feat2_;
  std::vector<double> q_;
  int action_ = 0;
};

/// One-step actor-critic with linear tile-coded critic and softmax-of-
/// preferences actor, both zero-initialized, SGD updates.
class ActorCriticAgent : public OnlineAgent {
 public:
  ActorCriticAgent(const TileCoder* coder, const EnvSpec& spec, const Hyperparams& hp,
                   uint64_t seed);

  int start(const StateVec& s) override;
  int step(double reward, const StateVec& next_state) override;
  void finish(double reward) override;

  double state_value(const StateVec& s) const;
  std::vector<double> policy_probs(const StateVec& s) const;

 private:
  double value_from(const std::vector<int32_t>& feat) const;
  std::vector<double> prefs_from(const std::vector<int32_t>& feat) const;
  void update_actor_critic(double delta);

  const TileCoder* coder_;
  EnvSpec spec_;
  double alpha_critic_, alpha_actor_;
  RandomStream rng_;
  SparseVector critic_, actor_;
  std::vector<int32_t> feat_, feat2_;
  int action_ = 0;
};

/// A fixed (non-learning) stochastic policy.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<double> probs(const StateVec& s) const = 0;
};

class UniformPolicy : public Policy {
 public:
  explicit UniformPolicy(int actions) : actions_(actions) {}
  std::vector<double> probs(const StateVec&) const override {
    return std::vector<double>(static_cast<size_t>(actions_), 1.0 / actions_);
  }

 private:
  int actions_;
};

/// Read-only tile-coded action values built from a weight snapshot.
class FrozenQ {
 public:
  FrozenQ(const TileCoder* coder, int actions, double init_value,
          std::vector<std::pair<int64_t, double>> snapshot);

  std::vector<double> q_values(const StateVec& s) const;
  const TileCoder* coder() const { return coder_; }
  int actions() const { return actions_; }

 private:
  const TileCoder* coder_;
  int actions_;
  double init_;
  SlotIndex index_;
  std::vector<double> w_;
};

class SoftmaxQPolicy : public Policy {
 public:
  SoftmaxQPolicy(std::shared_ptr<const FrozenQ> q, double tau) : q_(std::move(q)), tau_(tau) {}
  std::vector<double> probs(const StateVec& s) const override {
    return softmax_policy(q_->q_values(s), tau_);
  }

 private:
  std::shared_ptr<const FrozenQ> q_;
  double tau_;
};

class EpsilonGreedyQPolicy : public Policy {
 public:
  EpsilonGreedyQPolicy(std::shared_ptr<const FrozenQ> q, double epsilon)
      : q_(std::move(q)), eps_(epsilon) {}
  std::vector<double> probs(const StateVec& s) const override;

 private:
  std::shared_ptr<const FrozenQ> q_;
  double eps_;
};

/// Runs a fixed policy through the OnlineAgent interface (no learning).
class FixedPolicyAgent : public OnlineAgent {
 public:
  FixedPolicyAgent(std::shared_ptr<const Policy> policy, uint64_t seed)
      : policy_(std::move(policy)), rng_(seed) {}

  int start(const StateVec& s) override { return act(s); }
  int step(double, const StateVec& next_state) override { return act(next_state); }
  void finish(double) override {}

 private:
  int act(const StateVec& s) { return sample_action(policy_->probs(s), rng_); }

  std::shared_ptr<const Policy> policy_;
  RandomStream rng_;
};

/// Builds the learner named by hp.kind.
std::unique_ptr<OnlineAgent> make_agent(const TileCoder* coder, const EnvSpec& spec,
                                        const Hyperparams& hp, uint64_t seed);

}  // namespace caltune

#endif
