#ifndef CALTUNE_HYPERPARAMS_HPP
#define CALTUNE_HYPERPARAMS_HPP

#include <string>

#include "json.hpp"

namespace caltune {

enum class AgentKind { expected_sarsa, actor_critic };

/// One candidate hyperparameter setting for the online learner.
struct Hyperparams {
  AgentKind kind = AgentKind::expected_sarsa;
  double stepsize = 0.1;         // Adam stepsize (Sarsa) / critic stepsize (AC)
  double adam_beta1 = 0.0;
  double temperature = 1.0;
  double optimistic_init = 0.0;
  double trace_decay = 0.0;
  double actor_ratio = 0.1;      // actor stepsize as a fraction of the critic's

  nlohmann::json to_json() const {
    if (kind == AgentKind::actor_critic)
      return {{"agent", "actor_critic"},
              {"critic_stepsize", stepsize},
              {"actor_ratio", actor_ratio}};
    return {{"agent", "expected_sarsa"}, {"stepsize", stepsize},
            {"adam_beta1", adam_beta1},  {"temperature", temperature},
            {"optimistic_init", optimistic_init}, {"trace_decay", trace_decay}};
  }

  std::string label() const { return to_json().dump(); }
};

}  // namespace caltune

#endif
