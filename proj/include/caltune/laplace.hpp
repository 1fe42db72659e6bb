#ifndef CALTUNE_LAPLACE_HPP
#define CALTUNE_LAPLACE_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "caltune/common.hpp"
#include "caltune/datalog.hpp"
#include "caltune/rng.hpp"

namespace caltune {

/// Two-hidden-layer perceptron mapping raw states to the embedding used as
/// the nearest-neighbor distance metric. Rectifier hidden units, linear
/// output. Parameters live in one flat vector so the trainer and the
/// finite-difference checks can treat them uniformly.
class LaplaceEncoder {
 public:
  LaplaceEncoder() = default;
  LaplaceEncoder(int in_dim, int hidden1, int hidden2, int out_dim, uint64_t seed);

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  int hidden1() const { return h1_; }
  int hidden2() const { return h2_; }

  Eigen::VectorXd embed(const StateVec& s) const;
  /// Columns are samples.
  Eigen::MatrixXd embed_batch(const Eigen::MatrixXd& x) const;

  const std::vector<double>& params() const { return params_; }
  std::vector<double>& params() { return params_; }
  size_t param_count() const { return params_.size(); }

  void save(const std::string& path) const;
  static LaplaceEncoder load(const std::string& path);
  uint64_t param_hash() const;

  // flat-parameter layout
  struct Layout {
    int w1_off, b1_off, w2_off, b2_off, w3_off, b3_off, total;
  };
  Layout layout() const;

 private:
  friend struct LaplaceBackprop;
  int in_ = 0, h1_ = 0, h2_ = 0, out_ = 0;
  std::vector<double> params_;
};

struct LaplaceConfig {
  double kappa = 0.8;
  double beta = 5.0;
  double zeta = 0.5;
  double learning_rate = 3e-5;
  int batch_size = 128;
  int traj_window = 20;
  int max_steps = 30000;
  int check_interval = 1000;
  int patience = 3;
  int hidden1 = 128;
  int hidden2 = 128;
  int out_dim = 32;
};

/// Named per-environment defaults for the representation loss.
LaplaceConfig laplace_preset(EnvName name);

/// Flattened view of the states in a log, with trajectory structure:
/// each trajectory contributes its visited states plus the final next state.
class StateSequence {
 public:
  explicit StateSequence(const DataLog& log);

  size_t anchor_count() const { return anchors_.size(); }
  /// Draws (anchor, close) where close = the state `u` steps later in the
  /// same trajectory and u follows the normalized kappa-power distribution
  /// over {1, ..., min(window, steps remaining)}.
  void sample_pair(double kappa, int window, RandomStream& rng, StateVec* anchor,
                   StateVec* close) const;
  /// Uniform draw over every stored state.
  const StateVec& sample_state(RandomStream& rng) const;
  const std::vector<StateVec>& all_states() const { return states_; }

 private:
  struct Anchor {
    size_t state_pos;
    int remaining;  // states after this one within the trajectory
  };
  std::vector<StateVec> states_;
  std::vector<Anchor> anchors_;
};

/// Offset probabilities P(u), u in {1..limit}, proportional to kappa^u.
std::vector<double> offset_probabilities(double kappa, int limit);

/// Mean over the batch of
///   ||psi(a) - psi(c)||^2 + beta ((psi(a)^T psi(r))^2
///                                 - zeta ||psi(a)||^2 - zeta ||psi(r)||^2).
double laplace_loss(const LaplaceEncoder& enc, const Eigen::MatrixXd& anchors,
                    const Eigen::MatrixXd& closes, const Eigen::MatrixXd& randoms, double beta,
                    double zeta);

/// Backpropagation gradient of laplace_loss with respect to the flat
/// parameter vector; also returns the loss value.
double laplace_grad(const LaplaceEncoder& enc, const Eigen::MatrixXd& anchors,
                    const Eigen::MatrixXd& closes, const Eigen::MatrixXd& randoms, double beta,
                    double zeta, std::vector<double>* grad);

struct LaplaceTrainResult {
  LaplaceEncoder encoder;
  int steps_run = 0;
  bool converged_early = false;
  double best_checked_loss = 0.0;
  std::vector<std::string> warnings;
};

/// Adam descent on the pair loss with the convergence cutoff: the window
/// loss is checked every check_interval steps and training stops once it
/// fails to improve for `patience` consecutive checks; the best-checkpoint
/// encoder is returned.
LaplaceTrainResult train_laplace(const DataLog& log, const LaplaceConfig& config, uint64_t seed);

/// (sum_i ||psi(s_i) - psi(s_j~U)|| - sum_i ||psi(s_i) - psi(s'_i)||)
///   / sum_i ||psi(s_i) - psi(s_j~U)||  over n sampled anchor transitions.
double dynamics_awareness(const LaplaceEncoder& enc, const DataLog& log, uint64_t seed,
                          int n_anchors = 10000, std::vector<std::string>* warnings = nullptr);

}  // namespace caltune

#endif
