#ifndef CALTUNE_ENVS_HPP
#define CALTUNE_ENVS_HPP

#include <memory>
#include <string>

#include "caltune/common.hpp"
#include "caltune/rng.hpp"

#include "json.hpp"

namespace caltune {

enum class EnvName { acrobot, acrobot_changed, puddleworld, cartpole };

EnvName env_name_from_string(const std::string& s);
std::string to_string(EnvName n);

struct EnvSpec {
  EnvName name = EnvName::acrobot;
  int action_count = 3;
  double discount = 1.0;
  bool episodic = true;
  int state_dim = 6;
};

EnvSpec env_spec(EnvName name);

struct StepOutcome {
  StateVec next_state;
  double reward = 0.0;
  bool terminal = false;
  // Cartpole restarts from a start state on failure without terminating the
  // episode; the flag lets callers reset eligibility traces.
  bool teleported = false;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual StateVec reset() = 0;
  virtual StepOutcome step(int action) = 0;
  virtual const StateVec& state() const = 0;
  /// Resolved physics/geometry parameters, echoed into run reports.
  virtual nlohmann::json params_json() const { return nlohmann::json::object(); }
};

struct AcrobotParams {
  double link1_length = 1.0;
  double link2_length = 1.0;
  double link1_mass = 1.0;
  double link2_mass = 1.0;
  double link1_com = 0.5;  // distance of center of mass from the pivot
  double link2_com = 0.5;
  double link1_inertia = 1.0;
  double link2_inertia = 1.0;
  double gravity = 9.8;
  double dt = 0.05;
  int substeps = 4;
  double max_vel1 = 4.0 * 3.14159265358979323846;
  double max_vel2 = 9.0 * 3.14159265358979323846;
  double reset_range = 0.1;
};

class AcrobotEnv : public Environment {
 public:
  AcrobotEnv(uint64_t seed, bool changed);
  AcrobotEnv(uint64_t seed, const AcrobotParams& params, bool changed);

  const EnvSpec& spec() const override { return spec_; }
  StateVec reset() override;
  StepOutcome step(int action) override;
  const StateVec& state() const override { return obs_; }
  nlohmann::json params_json() const override;

  /// Steps from an explicit observation (cos/sin form); used by tests.
  StepOutcome step_from(const StateVec& obs, int action);

  const AcrobotParams& params() const { return params_; }

 private:
  void set_from_obs(const StateVec& obs);
  StateVec observe() const;

  EnvSpec spec_;
  AcrobotParams params_;
  RandomStream rng_;
  double theta1_ = 0.0, theta2_ = 0.0, dtheta1_ = 0.0, dtheta2_ = 0.0;
  StateVec obs_;
};

struct PuddleWorldParams {
  double step_size = 0.05;
  double noise_std = 0.01;
  double goal_x = 0.95;
  double goal_y = 0.95;
  double puddle_radius = 0.1;
  double penalty_scale = 400.0;
  // Two capsule-shaped puddles given by their axis endpoints.
  double p1x1 = 0.10, p1y1 = 0.75, p1x2 = 0.45, p1y2 = 0.75;
  double p2x1 = 0.45, p2y1 = 0.40, p2x2 = 0.45, p2y2 = 0.80;
};

class PuddleWorldEnv : public Environment {
 public:
  explicit PuddleWorldEnv(uint64_t seed);
  PuddleWorldEnv(uint64_t seed, const PuddleWorldParams& params);

  const EnvSpec& spec() const override { return spec_; }
  StateVec reset() override;
  StepOutcome step(int action) override;
  const StateVec& state() const override { return obs_; }
  nlohmann::json params_json() const override;

  StepOutcome step_from(const StateVec& obs, int action);

  bool in_goal(double x, double y) const;
  /// Depth into the nearest puddle (0 outside both).
  double puddle_depth(double x, double y) const;
  const PuddleWorldParams& params() const { return params_; }

 private:
  EnvSpec spec_;
  PuddleWorldParams params_;
  RandomStream rng_;
  StateVec obs_;
};

struct CartpoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double force_mag = 10.0;
  double dt = 0.02;
  double theta_threshold = 12.0 * 3.14159265358979323846 / 180.0;
  double x_threshold = 2.4;
  double action_noise_std = 0.1;  // Gaussian scaling noise on the applied force
  double failure_reward = -1.0;
  double reset_range = 0.05;
};

class CartpoleEnv : public Environment {
 public:
  explicit CartpoleEnv(uint64_t seed);
  CartpoleEnv(uint64_t seed, const CartpoleParams& params);

  const EnvSpec& spec() const override { return spec_; }
  StateVec reset() override;
  StepOutcome step(int action) override;
  const StateVec& state() const override { return obs_; }
  nlohmann::json params_json() const override;

  StepOutcome step_from(const StateVec& obs, int action);
  const CartpoleParams& params() const { return params_; }

 private:
  StateVec sample_start();

  EnvSpec spec_;
  CartpoleParams params_;
  RandomStream rng_;
  StateVec obs_;
};

std::unique_ptr<Environment> make_env(const EnvSpec& spec, uint64_t seed);
std::unique_ptr<Environment> make_env(EnvName name, uint64_t seed);

/// Per-dimension tile-coding bounds for each task.
void state_bounds(EnvName name, std::vector<double>* lo, std::vector<double>* hi);

}  // namespace caltune

#endif
