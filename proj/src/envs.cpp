#include "caltune/envs.hpp"

#include <cmath>

namespace caltune {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double x) {
  while (x > kPi) x -= 2.0 * kPi;
  while (x < -kPi) x += 2.0 * kPi;
  return x;
}
}  // namespace

EnvName env_name_from_string(const std::string& s) {
  if (s == "acrobot") return EnvName::acrobot;
  if (s == "acrobot-changed") return EnvName::acrobot_changed;
  if (s == "puddleworld") return EnvName::puddleworld;
  if (s == "cartpole") return EnvName::cartpole;
  throw ConfigError("unknown environment name: " + s);
}

std::string to_string(EnvName n) {
  switch (n) {
    case EnvName::acrobot: return "acrobot";
    case EnvName::acrobot_changed: return "acrobot-changed";
    case EnvName::puddleworld: return "puddleworld";
    case EnvName::cartpole: return "cartpole";
  }
  return "?";
}

EnvSpec env_spec(EnvName name) {
  EnvSpec s;
  s.name = name;
  switch (name) {
    case EnvName::acrobot:
    case EnvName::acrobot_changed:
      s.action_count = 3;
      s.discount = 1.0;
      s.episodic = true;
      s.state_dim = 6;
      break;
    case EnvName::puddleworld:
      s.action_count = 4;
      s.discount = 1.0;
      s.episodic = true;
      s.state_dim = 2;
      break;
    case EnvName::cartpole:
      s.action_count = 2;
      s.discount = 0.99;
      s.episodic = false;
      s.state_dim = 4;
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Acrobot
// ---------------------------------------------------------------------------

AcrobotEnv::AcrobotEnv(uint64_t seed, bool changed)
    : AcrobotEnv(seed, AcrobotParams{}, changed) {}

AcrobotEnv::AcrobotEnv(uint64_t seed, const AcrobotParams& params, bool changed)
    : spec_(env_spec(changed ? EnvName::acrobot_changed : EnvName::acrobot)),
      params_(params),
      rng_(seed) {
  if (changed) {
    params_.link1_length *= 2.0;
    params_.link1_mass *= 2.0;
    params_.link1_com *= 2.0;
  }
  reset();
}

StateVec AcrobotEnv::observe() const {
  StateVec o(6);
  o[0] = std::cos(theta1_);
  o[1] = std::sin(theta1_);
  o[2] = std::cos(theta2_);
  o[3] = std::sin(theta2_);
  o[4] = dtheta1_;
  o[5] = dtheta2_;
  return o;
}

void AcrobotEnv::set_from_obs(const StateVec& obs) {
  theta1_ = std::atan2(obs[1], obs[0]);
  theta2_ = std::atan2(obs[3], obs[2]);
  dtheta1_ = obs[4];
  dtheta2_ = obs[5];
}

StateVec AcrobotEnv::reset() {
  double w = params_.reset_range;
  theta1_ = rng_.uniform(-w, w);
  theta2_ = rng_.uniform(-w, w);
  dtheta1_ = rng_.uniform(-w, w);
  dtheta2_ = rng_.uniform(-w, w);
  obs_ = observe();
  return obs_;
}

namespace {
// Angular accelerations for the two-link underactuated pendulum; angles are
// measured from the downward vertical, torque acts on the second joint.
void acrobot_accels(const AcrobotParams& p, double torque, double t1, double t2,
                    double dt1, double dt2, double* ddt1, double* ddt2) {
  const double m1 = p.link1_mass, m2 = p.link2_mass;
  const double l1 = p.link1_length;
  const double lc1 = p.link1_com, lc2 = p.link2_com;
  const double i1 = p.link1_inertia, i2 = p.link2_inertia;
  const double g = p.gravity;

  double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - kPi / 2.0);
  double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                2.0 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                (m1 * lc1 + m2 * l1) * g * std::cos(t1 - kPi / 2.0) + phi2;
  *ddt2 = (torque + (d2 / d1) * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
          (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  *ddt1 = -(d2 * *ddt2 + phi1) / d1;
}
}  // namespace

namespace {
struct AcrobotDeriv {
  double dt1, dt2, ddt1, ddt2;
};

AcrobotDeriv acrobot_f(const AcrobotParams& p, double torque, const std::array<double, 4>& y) {
  AcrobotDeriv d;
  d.dt1 = y[2];
  d.dt2 = y[3];
  acrobot_accels(p, torque, y[0], y[1], y[2], y[3], &d.ddt1, &d.ddt2);
  return d;
}
}  // namespace

StepOutcome AcrobotEnv::step(int action) {
  if (action < 0 || action >= spec_.action_count)
    throw ArgumentError("acrobot: action out of range");
  const double torque = static_cast<double>(action - 1);  // {-1, 0, +1}

  std::array<double, 4> y{theta1_, theta2_, dtheta1_, dtheta2_};
  const double h = params_.dt;
  auto add = [](const std::array<double, 4>& a, const AcrobotDeriv& k, double s) {
    return std::array<double, 4>{a[0] + s * k.dt1, a[1] + s * k.dt2, a[2] + s * k.ddt1,
                                 a[3] + s * k.ddt2};
  };
  for (int s = 0; s < params_.substeps; ++s) {
    AcrobotDeriv k1 = acrobot_f(params_, torque, y);
    AcrobotDeriv k2 = acrobot_f(params_, torque, add(y, k1, 0.5 * h));
    AcrobotDeriv k3 = acrobot_f(params_, torque, add(y, k2, 0.5 * h));
    AcrobotDeriv k4 = acrobot_f(params_, torque, add(y, k3, h));
    y[0] += h / 6.0 * (k1.dt1 + 2.0 * k2.dt1 + 2.0 * k3.dt1 + k4.dt1);
    y[1] += h / 6.0 * (k1.dt2 + 2.0 * k2.dt2 + 2.0 * k3.dt2 + k4.dt2);
    y[2] += h / 6.0 * (k1.ddt1 + 2.0 * k2.ddt1 + 2.0 * k3.ddt1 + k4.ddt1);
    y[3] += h / 6.0 * (k1.ddt2 + 2.0 * k2.ddt2 + 2.0 * k3.ddt2 + k4.ddt2);
    y[0] = wrap_pi(y[0]);
    y[1] = wrap_pi(y[1]);
    y[2] = std::clamp(y[2], -params_.max_vel1, params_.max_vel1);
    y[3] = std::clamp(y[3], -params_.max_vel2, params_.max_vel2);
  }
  double t1 = y[0], t2 = y[1], dt1 = y[2], dt2 = y[3];

  theta1_ = t1;
  theta2_ = t2;
  dtheta1_ = dt1;
  dtheta2_ = dt2;
  obs_ = observe();

  StepOutcome out;
  out.next_state = obs_;
  out.reward = -1.0;
  out.terminal = (-std::cos(theta1_) - std::cos(theta2_ + theta1_)) > 1.0;
  return out;
}

StepOutcome AcrobotEnv::step_from(const StateVec& obs, int action) {
  set_from_obs(obs);
  return step(action);
}

nlohmann::json AcrobotEnv::params_json() const {
  return {{"link1_length", params_.link1_length}, {"link2_length", params_.link2_length},
          {"link1_mass", params_.link1_mass},     {"link2_mass", params_.link2_mass},
          {"link1_com", params_.link1_com},       {"link2_com", params_.link2_com},
          {"link1_inertia", params_.link1_inertia}, {"link2_inertia", params_.link2_inertia},
          {"gravity", params_.gravity},           {"dt", params_.dt},
          {"substeps", params_.substeps},         {"max_vel1", params_.max_vel1},
          {"max_vel2", params_.max_vel2},         {"reset_range", params_.reset_range}};
}

// ---------------------------------------------------------------------------
// Puddle World
// ---------------------------------------------------------------------------

PuddleWorldEnv::PuddleWorldEnv(uint64_t seed) : PuddleWorldEnv(seed, PuddleWorldParams{}) {}

PuddleWorldEnv::PuddleWorldEnv(uint64_t seed, const PuddleWorldParams& params)
    : spec_(env_spec(EnvName::puddleworld)), params_(params), rng_(seed) {
  reset();
}

bool PuddleWorldEnv::in_goal(double x, double y) const {
  return x >= params_.goal_x && y >= params_.goal_y;
}

namespace {
double point_segment_distance(double px, double py, double x1, double y1, double x2, double y2) {
  double dx = x2 - x1, dy = y2 - y1;
  double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - x1) * dx + (py - y1) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  double cx = x1 + t * dx, cy = y1 + t * dy;
  return std::sqrt((px - cx) * (px - cx) + (py - cy) * (py - cy));
}
}  // namespace

double PuddleWorldEnv::puddle_depth(double x, double y) const {
  double d1 = point_segment_distance(x, y, params_.p1x1, params_.p1y1, params_.p1x2, params_.p1y2);
  double d2 = point_segment_distance(x, y, params_.p2x1, params_.p2y1, params_.p2x2, params_.p2y2);
  double d = std::min(d1, d2);
  return std::max(0.0, params_.puddle_radius - d);
}

StateVec PuddleWorldEnv::reset() {
  double x, y;
  do {
    x = rng_.uniform();
    y = rng_.uniform();
  } while (in_goal(x, y));
  obs_ = StateVec{x, y};
  return obs_;
}

StepOutcome PuddleWorldEnv::step(int action) {
  if (action < 0 || action >= spec_.action_count)
    throw ArgumentError("puddleworld: action out of range");

  double dx = 0.0, dy = 0.0;
  switch (action) {
    case 0: dx = -params_.step_size; break;  // left
    case 1: dx = params_.step_size; break;   // right
    case 2: dy = params_.step_size; break;   // up
    case 3: dy = -params_.step_size; break;  // down
  }
  double x = std::clamp(obs_[0] + dx + rng_.normal(0.0, params_.noise_std), 0.0, 1.0);
  double y = std::clamp(obs_[1] + dy + rng_.normal(0.0, params_.noise_std), 0.0, 1.0);
  obs_ = StateVec{x, y};

  StepOutcome out;
  out.next_state = obs_;
  out.reward = -1.0 - params_.penalty_scale * puddle_depth(x, y);
  out.terminal = in_goal(x, y);
  return out;
}

StepOutcome PuddleWorldEnv::step_from(const StateVec& obs, int action) {
  obs_ = obs;
  return step(action);
}

nlohmann::json PuddleWorldEnv::params_json() const {
  return {{"step_size", params_.step_size},
          {"noise_std", params_.noise_std},
          {"goal_x", params_.goal_x},
          {"goal_y", params_.goal_y},
          {"puddle_radius", params_.puddle_radius},
          {"penalty_scale", params_.penalty_scale},
          {"puddle1", {params_.p1x1, params_.p1y1, params_.p1x2, params_.p1y2}},
          {"puddle2", {params_.p2x1, params_.p2y1, params_.p2x2, params_.p2y2}}};
}

// ---------------------------------------------------------------------------
// Cartpole (continuing, noisy actions)
// ---------------------------------------------------------------------------

CartpoleEnv::CartpoleEnv(uint64_t seed) : CartpoleEnv(seed, CartpoleParams{}) {}

CartpoleEnv::CartpoleEnv(uint64_t seed, const CartpoleParams& params)
    : spec_(env_spec(EnvName::cartpole)), params_(params), rng_(seed) {
  reset();
}

StateVec CartpoleEnv::sample_start() {
  StateVec s(4);
  for (int i = 0; i < 4; ++i) s[i] = rng_.uniform(-params_.reset_range, params_.reset_range);
  return s;
}

StateVec CartpoleEnv::reset() {
  obs_ = sample_start();
  return obs_;
}

StepOutcome CartpoleEnv::step(int action) {
  if (action < 0 || action >= spec_.action_count)
    throw ArgumentError("cartpole: action out of range");

  double x = obs_[0], x_dot = obs_[1], theta = obs_[2], theta_dot = obs_[3];
  double force = (action == 1 ? params_.force_mag : -params_.force_mag);
  if (params_.action_noise_std > 0.0)
    force *= 1.0 + rng_.normal(0.0, params_.action_noise_std);

  const double total_mass = params_.cart_mass + params_.pole_mass;
  const double pml = params_.pole_mass * params_.pole_half_length;
  double cos_t = std::cos(theta), sin_t = std::sin(theta);
  double temp = (force + pml * theta_dot * theta_dot * sin_t) / total_mass;
  double theta_acc = (params_.gravity * sin_t - cos_t * temp) /
                     (params_.pole_half_length *
                      (4.0 / 3.0 - params_.pole_mass * cos_t * cos_t / total_mass));
  double x_acc = temp - pml * theta_acc * cos_t / total_mass;

  x += params_.dt * x_dot;
  x_dot += params_.dt * x_acc;
  theta += params_.dt * theta_dot;
  theta_dot += params_.dt * theta_acc;

  bool failed = std::abs(theta) > params_.theta_threshold || std::abs(x) > params_.x_threshold;

  StepOutcome out;
  if (failed) {
    obs_ = sample_start();
    out.reward = params_.failure_reward;
    out.teleported = true;
  } else {
    obs_ = StateVec{x, x_dot, theta, theta_dot};
    out.reward = 0.0;
  }
  out.next_state = obs_;
  out.terminal = false;
  return out;
}

StepOutcome CartpoleEnv::step_from(const StateVec& obs, int action) {
  obs_ = obs;
  return step(action);
}

nlohmann::json CartpoleEnv::params_json() const {
  return {{"gravity", params_.gravity},
          {"cart_mass", params_.cart_mass},
          {"pole_mass", params_.pole_mass},
          {"pole_half_length", params_.pole_half_length},
          {"force_mag", params_.force_mag},
          {"dt", params_.dt},
          {"theta_threshold", params_.theta_threshold},
          {"x_threshold", params_.x_threshold},
          {"action_noise_std", params_.action_noise_std},
          {"failure_reward", params_.failure_reward},
          {"reset_range", params_.reset_range}};
}

std::unique_ptr<Environment> make_env(const EnvSpec& spec, uint64_t seed) {
  return make_env(spec.name, seed);
}

std::unique_ptr<Environment> make_env(EnvName name, uint64_t seed) {
  switch (name) {
    case EnvName::acrobot: return std::make_unique<AcrobotEnv>(seed, false);
    case EnvName::acrobot_changed: return std::make_unique<AcrobotEnv>(seed, true);
    case EnvName::puddleworld: return std::make_unique<PuddleWorldEnv>(seed);
    case EnvName::cartpole: return std::make_unique<CartpoleEnv>(seed);
  }
  throw ConfigError("unknown environment");
}

void state_bounds(EnvName name, std::vector<double>* lo, std::vector<double>* hi) {
  switch (name) {
    case EnvName::acrobot:
    case EnvName::acrobot_changed: {
      AcrobotParams p;
      *lo = {-1.0, -1.0, -1.0, -1.0, -p.max_vel1, -p.max_vel2};
      *hi = {1.0, 1.0, 1.0, 1.0, p.max_vel1, p.max_vel2};
      break;
    }
    case EnvName::puddleworld:
      *lo = {0.0, 0.0};
      *hi = {1.0, 1.0};
      break;
    case EnvName::cartpole: {
      CartpoleParams p;
      *lo = {-p.x_threshold, -3.0, -p.theta_threshold, -3.5};
      *hi = {p.x_threshold, 3.0, p.theta_threshold, 3.5};
      break;
    }
  }
}

}  // namespace caltune
