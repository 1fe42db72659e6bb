#include <cmath>

#include "caltune/envs.hpp"
#include "caltune/rng.hpp"
#include "doctest.h"

using namespace caltune;

namespace {

// Independent re-derivation of the two-link pendulum dynamics for the
// integration oracle. Integrated at 100x finer resolution than the
// environment.
struct OracleState {
  double t1, t2, dt1, dt2;
};

void oracle_accels(double torque, double t1, double t2, double dt1, double dt2, double* a1,
                   double* a2) {
  const double m1 = 1.0, m2 = 1.0, l1 = 1.0, lc1 = 0.5, lc2 = 0.5, i1 = 1.0, i2 = 1.0, g = 9.8;
  const double pi = 3.14159265358979323846;
  double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - pi / 2);
  double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                2 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                (m1 * lc1 + m2 * l1) * g * std::cos(t1 - pi / 2) + phi2;
  *a2 = (torque + (d2 / d1) * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
        (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  *a1 = -(d2 * *a2 + phi1) / d1;
}

OracleState oracle_integrate(OracleState y, double torque, double total_time, int n_steps) {
  double h = total_time / n_steps;
  for (int s = 0; s < n_steps; ++s) {
    double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    oracle_accels(torque, y.t1, y.t2, y.dt1, y.dt2, &k1a, &k1b);
    oracle_accels(torque, y.t1 + 0.5 * h * y.dt1, y.t2 + 0.5 * h * y.dt2, y.dt1 + 0.5 * h * k1a,
                  y.dt2 + 0.5 * h * k1b, &k2a, &k2b);
    oracle_accels(torque, y.t1 + 0.5 * h * (y.dt1 + 0.5 * h * k1a),
                  y.t2 + 0.5 * h * (y.dt2 + 0.5 * h * k1b), y.dt1 + 0.5 * h * k2a,
                  y.dt2 + 0.5 * h * k2b, &k3a, &k3b);
    oracle_accels(torque, y.t1 + h * (y.dt1 + 0.5 * h * k2a), y.t2 + h * (y.dt2 + 0.5 * h * k2b),
                  y.dt1 + h * k3a, y.dt2 + h * k3b, &k4a, &k4b);
    double nt1 = y.t1 + h * y.dt1 + h * h / 6 * (k1a + k2a + k3a);
    double nt2 = y.t2 + h * y.dt2 + h * h / 6 * (k1b + k2b + k3b);
    y.dt1 += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    y.dt2 += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
    y.t1 = nt1;
    y.t2 = nt2;
  }
  return y;
}

}  // namespace

TEST_CASE("env specs match the task definitions") {
  CHECK(env_spec(EnvName::acrobot).action_count == 3);
  CHECK(env_spec(EnvName::acrobot_changed).action_count == 3);
  CHECK(env_spec(EnvName::puddleworld).action_count == 4);
  CHECK(env_spec(EnvName::cartpole).action_count == 2);
  CHECK(env_spec(EnvName::acrobot).episodic);
  CHECK_FALSE(env_spec(EnvName::cartpole).episodic);
}

TEST_CASE("unknown environment name raises a configuration error") {
  CHECK_THROWS_AS(env_name_from_string("mountaincar"), ConfigError);
}

TEST_CASE("changed acrobot doubles first-link length and mass") {
  AcrobotEnv base(7, false), changed(7, true);
  CHECK(base.params().link1_length == 1.0);
  CHECK(base.params().link1_mass == 1.0);
  CHECK(changed.params().link1_length == 2.0);
  CHECK(changed.params().link1_mass == 2.0);
}

TEST_CASE("equal seeds produce identical reset sequences") {
  for (EnvName name : {EnvName::acrobot, EnvName::puddleworld, EnvName::cartpole}) {
    auto a = make_env(name, 123), b = make_env(name, 123);
    for (int i = 0; i < 10; ++i) {
      StateVec sa = a->reset(), sb = b->reset();
      CHECK(sa == sb);
    }
  }
}

TEST_CASE("acrobot reset is within range and trig-consistent") {
  AcrobotEnv env(99, false);
  for (int i = 0; i < 100; ++i) {
    StateVec s = env.reset();
    CHECK(std::abs(s[0] * s[0] + s[1] * s[1] - 1.0) < 1e-9);
    CHECK(std::abs(s[2] * s[2] + s[3] * s[3] - 1.0) < 1e-9);
    CHECK(std::abs(s[4]) <= 0.1);
    CHECK(std::abs(s[5]) <= 0.1);
  }
}

TEST_CASE("acrobot zero-width reset is the rest state") {
  AcrobotParams p;
  p.reset_range = 0.0;
  AcrobotEnv env(1, p, false);
  StateVec s = env.reset();
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 1.0);
  CHECK(s[3] == 0.0);
  CHECK(s[4] == 0.0);
  CHECK(s[5] == 0.0);
}

TEST_CASE("acrobot step rewards -1 and keeps the trig invariant") {
  AcrobotEnv env(5, false);
  env.reset();
  RandomStream rng(11);
  for (int i = 0; i < 500; ++i) {
    StepOutcome out = env.step(rng.action(3));
    CHECK(std::abs(out.next_state[0] * out.next_state[0] +
                   out.next_state[1] * out.next_state[1] - 1.0) < 1e-9);
    CHECK(std::abs(out.next_state[2] * out.next_state[2] +
                   out.next_state[3] * out.next_state[3] - 1.0) < 1e-9);
    CHECK(out.reward == -1.0);
    if (out.terminal) env.reset();
  }
  CHECK_THROWS_AS(env.step(3), ArgumentError);
}

TEST_CASE("acrobot fixed-torque trajectory matches a high-resolution integration") {
  AcrobotParams p;
  p.reset_range = 0.0;
  AcrobotEnv env(1, p, false);
  env.reset();
  OracleState ref{0.0, 0.0, 0.0, 0.0};
  for (int step = 0; step < 12; ++step) {
    // advance the oracle from the environment's current state
    StateVec cur = env.state();
    ref.t1 = std::atan2(cur[1], cur[0]);
    ref.t2 = std::atan2(cur[3], cur[2]);
    ref.dt1 = cur[4];
    ref.dt2 = cur[5];
    OracleState next = oracle_integrate(ref, /*torque=*/1.0, 0.2, 2000);

    StepOutcome out = env.step(2);  // +1 torque
    CHECK(std::abs(out.next_state[0] - std::cos(next.t1)) < 1e-6);
    CHECK(std::abs(out.next_state[1] - std::sin(next.t1)) < 1e-6);
    CHECK(std::abs(out.next_state[2] - std::cos(next.t2)) < 1e-6);
    CHECK(std::abs(out.next_state[3] - std::sin(next.t2)) < 1e-6);
    CHECK(std::abs(out.next_state[4] - next.dt1) < 1e-6);
    CHECK(std::abs(out.next_state[5] - next.dt2) < 1e-6);
  }
}

TEST_CASE("puddle world resets never start inside the goal") {
  PuddleWorldEnv env(42);
  for (int i = 0; i < 10000; ++i) {
    StateVec s = env.reset();
    CHECK(s[0] >= 0.0);
    CHECK(s[0] <= 1.0);
    CHECK(s[1] >= 0.0);
    CHECK(s[1] <= 1.0);
    CHECK_FALSE(env.in_goal(s[0], s[1]));
  }
}

TEST_CASE("puddle world reward is -1 minus a depth-proportional penalty") {
  PuddleWorldParams p;
  p.noise_std = 0.0;
  PuddleWorldEnv env(3, p);

  // on the axis of the horizontal puddle: depth = radius
  CHECK(env.puddle_depth(0.3, 0.75) == doctest::Approx(0.1));
  // outside both puddles
  CHECK(env.puddle_depth(0.9, 0.1) == 0.0);
  // deeper points are penalized strictly more
  double d_shallow = env.puddle_depth(0.3, 0.66);
  double d_deep = env.puddle_depth(0.3, 0.70);
  CHECK(d_deep > d_shallow);
  CHECK(d_shallow > 0.0);

  StepOutcome out = env.step_from(StateVec{0.30, 0.80}, 3);  // down: lands on the axis
  CHECK(out.next_state[1] == doctest::Approx(0.75));
  CHECK(out.reward == doctest::Approx(-1.0 - 400.0 * 0.1));
  CHECK_FALSE(out.terminal);

  // every non-goal step pays at most -1
  RandomStream rng(4);
  PuddleWorldEnv noisy(9);
  noisy.reset();
  for (int i = 0; i < 2000; ++i) {
    StepOutcome o = noisy.step(rng.action(4));
    if (!o.terminal) CHECK(o.reward <= -1.0);
    if (o.terminal) noisy.reset();
  }
}

TEST_CASE("puddle world terminates exactly in the goal region") {
  PuddleWorldParams p;
  p.noise_std = 0.0;
  PuddleWorldEnv env(3, p);
  StepOutcome out = env.step_from(StateVec{0.93, 0.99}, 1);  // right
  CHECK(out.next_state[0] >= 0.95);
  CHECK(out.terminal);
}

TEST_CASE("cartpole reset range and balanced reward") {
  CartpoleEnv env(8);
  for (int i = 0; i < 50; ++i) {
    StateVec s = env.reset();
    for (int d = 0; d < 4; ++d) CHECK(std::abs(s[d]) <= 0.05);
  }
  env.reset();
  StepOutcome out = env.step(0);
  CHECK(out.reward == 0.0);  // near-upright start cannot fail in one step
  CHECK_FALSE(out.terminal);
}

TEST_CASE("cartpole failure teleports without terminating") {
  CartpoleParams p;
  p.action_noise_std = 0.0;
  CartpoleEnv env(21, p);
  StateVec tilted{0.0, 0.0, 0.20, 2.0};  // past the 12-degree threshold soon
  StepOutcome out = env.step_from(tilted, 1);
  CHECK(out.reward == -1.0);
  CHECK_FALSE(out.terminal);
  CHECK(out.teleported);
  for (int d = 0; d < 4; ++d) CHECK(std::abs(out.next_state[d]) <= 0.05);
}

TEST_CASE("noise-free cartpole responds symmetrically to mirrored actions") {
  CartpoleParams p;
  p.action_noise_std = 0.0;
  CartpoleEnv env(2, p);
  StateVec s{0.1, -0.2, 0.05, 0.3};
  StateVec ms{-0.1, 0.2, -0.05, -0.3};
  StepOutcome a = env.step_from(s, 1);
  StepOutcome b = env.step_from(ms, 0);
  for (int d = 0; d < 4; ++d) CHECK(a.next_state[d] == doctest::Approx(-b.next_state[d]));
}
