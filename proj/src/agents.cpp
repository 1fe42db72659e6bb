#include "caltune/agents.hpp"

#include <cmath>

namespace caltune {

std::vector<double> softmax_policy(const std::vector<double>& qvalues, double tau) {
  if (tau <= 0.0) throw ArgumentError("softmax_policy: temperature must be positive");
  if (qvalues.empty()) throw ArgumentError("softmax_policy: empty values");
  double mx = qvalues[0];
  for (double q : qvalues) mx = std::max(mx, q);
  std::vector<double> p(qvalues.size());
  double sum = 0.0;
  for (size_t i = 0; i < qvalues.size(); ++i) {
    p[i] = std::exp((qvalues[i] - mx) / tau);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

int sample_action(const std::vector<double>& probs, RandomStream& rng) {
  double u = rng.uniform();
  double cum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

// ---------------------------------------------------------------------------
// Expected Sarsa(lambda)
// ---------------------------------------------------------------------------

ExpectedSarsaAgent::ExpectedSarsaAgent(const TileCoder* coder, const EnvSpec& spec,
                                       const Hyperparams& hp, uint64_t seed,
                                       double trace_drop_eps)
    : coder_(coder),
      spec_(spec),
      hp_(hp),
      rng_(seed),
      store_(static_cast<int64_t>(spec.action_count) * coder->table_size(),
             hp.optimistic_init / coder->num_tilings(), hp.stepsize, hp.adam_beta1),
      trace_(&store_, trace_drop_eps) {}

std::vector<double> ExpectedSarsaAgent::q_from_features(const std::vector<int32_t>& feat) {
  std::vector<double> q(static_cast<size_t>(spec_.action_count), 0.0);
  for (int a = 0; a < spec_.action_count; ++a) {
    int64_t base = static_cast<int64_t>(a) * coder_->table_size();
    double s = 0.0;
    for (int32_t f : feat) s += store_.read(base + f);
    q[static_cast<size_t>(a)] = s;
  }
  return q;
}

double ExpectedSarsaAgent::q_value(const StateVec& s, int action) {
  return q_values(s)[static_cast<size_t>(action)];
}

std::vector<double> ExpectedSarsaAgent::q_values(const StateVec& s) {
  std::vector<int32_t> feat;
  coder_->encode(s, &feat);
  return q_from_features(feat);
}

int ExpectedSarsaAgent::start(const StateVec& s) {
  trace_.clear();
  coder_->encode(s, &feat_);
  q_ = q_from_features(feat_);
  action_ = sample_action(softmax_policy(q_, hp_.temperature), rng_);
  return action_;
}

int ExpectedSarsaAgent::step(double reward, const StateVec& next_state) {
  coder_->encode(next_state, &feat2_);
  std::vector<double> q2 = q_from_features(feat2_);
  std::vector<double> pi2 = softmax_policy(q2, hp_.temperature);
  double expected = 0.0;
  for (size_t a = 0; a < q2.size(); ++a) expected += pi2[a] * q2[a];
  double delta = reward + spec_.discount * expected - q_[static_cast<size_t>(action_)];

  store_.begin_step();
  trace_.decay(spec_.discount * hp_.trace_decay);
  int64_t base = static_cast<int64_t>(action_) * coder_->table_size();
  for (int32_t f : feat_) trace_.add(base + f, 1.0);
  trace_.apply_td_gradient(delta);

  // act at the next state with the freshly updated weights
  feat_.swap(feat2_);
  q_ = q_from_features(feat_);
  action_ = sample_action(softmax_policy(q_, hp_.temperature), rng_);
  return action_;
}

void ExpectedSarsaAgent::finish(double reward) {
  double delta = reward - q_[static_cast<size_t>(action_)];
  store_.begin_step();
  trace_.decay(spec_.discount * hp_.trace_decay);
  int64_t base = static_cast<int64_t>(action_) * coder_->table_size();
  for (int32_t f : feat_) trace_.add(base + f, 1.0);
  trace_.apply_td_gradient(delta);
}

void ExpectedSarsaAgent::on_teleport() { trace_.clear(); }

// ---------------------------------------------------------------------------
// One-step actor-critic
// ---------------------------------------------------------------------------

ActorCriticAgent::ActorCriticAgent(const TileCoder* coder, const EnvSpec& spec,
                                   const Hyperparams& hp, uint64_t seed)
    : coder_(coder),
      spec_(spec),
      alpha_critic_(hp.stepsize),
      alpha_actor_(hp.stepsize * hp.actor_ratio),
      rng_(seed) {}

double ActorCriticAgent::value_from(const std::vector<int32_t>& feat) const {
  double s = 0.0;
  for (int32_t f : feat) s += critic_.read(f);
  return s;
}

std::vector<double> ActorCriticAgent::prefs_from(const std::vector<int32_t>& feat) const {
  std::vector<double> h(static_cast<size_t>(spec_.action_count), 0.0);
  for (int a = 0; a < spec_.action_count; ++a) {
    int64_t base = static_cast<int64_t>(a) * coder_->table_size();
    double s = 0.0;
    for (int32_t f : feat) s += actor_.read(base + f);
    h[static_cast<size_t>(a)] = s;
  }
  return h;
}

double ActorCriticAgent::state_value(const StateVec& s) const {
  return value_from(coder_->encode(s));
}

std::vector<double> ActorCriticAgent::policy_probs(const StateVec& s) const {
  return softmax_policy(prefs_from(coder_->encode(s)), 1.0);
}

void ActorCriticAgent::update_actor_critic(double delta) {
  for (int32_t f : feat_) critic_.add(f, alpha_critic_ * delta);
  std::vector<double> pi = softmax_policy(prefs_from(feat_), 1.0);
  for (int a = 0; a < spec_.action_count; ++a) {
    double coef = (a == action_ ? 1.0 : 0.0) - pi[static_cast<size_t>(a)];
    int64_t base = static_cast<int64_t>(a) * coder_->table_size();
    for (int32_t f : feat_) actor_.add(base + f, alpha_actor_ * delta * coef);
  }
}

int ActorCriticAgent::start(const StateVec& s) {
  coder_->encode(s, &feat_);
  action_ = sample_action(softmax_policy(prefs_from(feat_), 1.0), rng_);
  return action_;
}

int ActorCriticAgent::step(double reward, const StateVec& next_state) {
  coder_->encode(next_state, &feat2_);
  double delta = reward + spec_.discount * value_from(feat2_) - value_from(feat_);
  update_actor_critic(delta);
  feat_.swap(feat2_);
  action_ = sample_action(softmax_policy(prefs_from(feat_), 1.0), rng_);
  return action_;
}

void ActorCriticAgent::finish(double reward) {
  double delta = reward - value_from(feat_);
  update_actor_critic(delta);
}

// ---------------------------------------------------------------------------
// Fixed policies
// ---------------------------------------------------------------------------

FrozenQ::FrozenQ(const TileCoder* coder, int actions, double init_value,
                 std::vector<std::pair<int64_t, double>> snapshot)
    : coder_(coder), actions_(actions), init_(init_value), index_(snapshot.size() + 1) {
  w_.reserve(snapshot.size());
  for (const auto& [idx, val] : snapshot) {
    bool created = false;
    index_.find_or_insert(idx, &created);
    w_.push_back(val);
  }
}

std::vector<double> FrozenQ::q_values(const StateVec& s) const {
  std::vector<int32_t> feat = coder_->encode(s);
  std::vector<double> q(static_cast<size_t>(actions_), 0.0);
  for (int a = 0; a < actions_; ++a) {
    int64_t base = static_cast<int64_t>(a) * coder_->table_size();
    double sum = 0.0;
    for (int32_t f : feat) {
      int32_t slot = index_.find(base + f);
      sum += slot < 0 ? init_ : w_[static_cast<size_t>(slot)];
    }
    q[static_cast<size_t>(a)] = sum;
  }
  return q;
}

std::vector<double> EpsilonGreedyQPolicy::probs(const StateVec& s) const {
  std::vector<double> q = q_->q_values(s);
  size_t best = 0;
  for (size_t a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;  // ties resolve to the lowest action
  std::vector<double> p(q.size(), eps_ / static_cast<double>(q.size()));
  p[best] += 1.0 - eps_;
  return p;
}

std::unique_ptr<OnlineAgent> make_agent(const TileCoder* coder, const EnvSpec& spec,
                                        const Hyperparams& hp, uint64_t seed) {
  if (hp.kind == AgentKind::actor_critic)
    return std::make_unique<ActorCriticAgent>(coder, spec, hp, seed);
  return std::make_unique<ExpectedSarsaAgent>(coder, spec, hp, seed);
}

}  // namespace caltune
