#include "caltune/laplace.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "caltune/weights.hpp"

#include "json.hpp"

namespace caltune {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LaplaceEncoder::Layout LaplaceEncoder::layout() const {
  Layout l;
  l.w1_off = 0;
  l.b1_off = l.w1_off + h1_ * in_;
  l.w2_off = l.b1_off + h1_;
  l.b2_off = l.w2_off + h2_ * h1_;
  l.w3_off = l.b2_off + h2_;
  l.b3_off = l.w3_off + out_ * h2_;
  l.total = l.b3_off + out_;
  return l;
}

LaplaceEncoder::LaplaceEncoder(int in_dim, int hidden1, int hidden2, int out_dim, uint64_t seed)
    : in_(in_dim), h1_(hidden1), h2_(hidden2), out_(out_dim) {
  if (in_ < 1 || h1_ < 1 || h2_ < 1 || out_ < 1)
    throw ArgumentError("LaplaceEncoder: dimensions must be positive");
  params_.assign(static_cast<size_t>(layout().total), 0.0);
  RandomStream rng(seed);
  Layout l = layout();
  auto fill = [&](int off, int rows, int cols) {
    double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    for (int i = 0; i < rows * cols; ++i)
      params_[static_cast<size_t>(off + i)] = rng.uniform(-bound, bound);
  };
  fill(l.w1_off, h1_, in_);
  fill(l.w2_off, h2_, h1_);
  fill(l.w3_off, out_, h2_);
  // biases start at zero
}

namespace {
using CMap = Eigen::Map<const MatrixXd>;
using CVMap = Eigen::Map<const VectorXd>;
using MMap = Eigen::Map<MatrixXd>;
using VMap = Eigen::Map<VectorXd>;
}  // namespace

struct LaplaceBackprop {
  // Forward caches for one stream (columns = samples).
  MatrixXd z1, a1, z2, a2, out;

  static void forward(const LaplaceEncoder& e, const MatrixXd& x, LaplaceBackprop* c) {
    auto l = e.layout();
    CMap w1(&e.params_[static_cast<size_t>(l.w1_off)], e.h1_, e.in_);
    CVMap b1(&e.params_[static_cast<size_t>(l.b1_off)], e.h1_);
    CMap w2(&e.params_[static_cast<size_t>(l.w2_off)], e.h2_, e.h1_);
    CVMap b2(&e.params_[static_cast<size_t>(l.b2_off)], e.h2_);
    CMap w3(&e.params_[static_cast<size_t>(l.w3_off)], e.out_, e.h2_);
    CVMap b3(&e.params_[static_cast<size_t>(l.b3_off)], e.out_);

    c->z1 = (w1 * x).colwise() + b1;
    c->a1 = c->z1.cwiseMax(0.0);
    c->z2 = (w2 * c->a1).colwise() + b2;
    c->a2 = c->z2.cwiseMax(0.0);
    c->out = (w3 * c->a2).colwise() + b3;
  }

  // Backpropagates dL/d(out) for one stream, accumulating into grad.
  static void backward(const LaplaceEncoder& e, const MatrixXd& x, const LaplaceBackprop& c,
                       const MatrixXd& gout, std::vector<double>* grad) {
    auto l = e.layout();
    CMap w2(&e.params_[static_cast<size_t>(l.w2_off)], e.h2_, e.h1_);
    CMap w3(&e.params_[static_cast<size_t>(l.w3_off)], e.out_, e.h2_);
    MMap gw1(&(*grad)[static_cast<size_t>(l.w1_off)], e.h1_, e.in_);
    VMap gb1(&(*grad)[static_cast<size_t>(l.b1_off)], e.h1_);
    MMap gw2(&(*grad)[static_cast<size_t>(l.w2_off)], e.h2_, e.h1_);
    VMap gb2(&(*grad)[static_cast<size_t>(l.b2_off)], e.h2_);
    MMap gw3(&(*grad)[static_cast<size_t>(l.w3_off)], e.out_, e.h2_);
    VMap gb3(&(*grad)[static_cast<size_t>(l.b3_off)], e.out_);

    gw3 += gout * c.a2.transpose();
    gb3 += gout.rowwise().sum();
    MatrixXd gz2 =
        (w3.transpose() * gout).cwiseProduct((c.z2.array() > 0.0).cast<double>().matrix());
    gw2 += gz2 * c.a1.transpose();
    gb2 += gz2.rowwise().sum();
    MatrixXd gz1 =
        (w2.transpose() * gz2).cwiseProduct((c.z1.array() > 0.0).cast<double>().matrix());
    gw1 += gz1 * x.transpose();
    gb1 += gz1.rowwise().sum();
  }
};

Eigen::MatrixXd LaplaceEncoder::embed_batch(const MatrixXd& x) const {
  if (x.rows() != in_) throw ArgumentError("LaplaceEncoder: input dimension mismatch");
  LaplaceBackprop c;
  LaplaceBackprop::forward(*this, x, &c);
  return c.out;
}

Eigen::VectorXd LaplaceEncoder::embed(const StateVec& s) const {
  MatrixXd x(in_, 1);
  for (int i = 0; i < in_; ++i) x(i, 0) = s[i];
  return embed_batch(x).col(0);
}

namespace {
struct PairLossParts {
  MatrixXd ga, gc, gr;  // dL/d(embedding) per stream
  double loss = 0.0;
};

PairLossParts pair_loss(const MatrixXd& pa, const MatrixXd& pc, const MatrixXd& pr, double beta,
                        double zeta, bool want_grad) {
  const auto b = pa.cols();
  PairLossParts parts;
  double total = 0.0;
  if (want_grad) {
    parts.ga = MatrixXd::Zero(pa.rows(), b);
    parts.gc = MatrixXd::Zero(pa.rows(), b);
    parts.gr = MatrixXd::Zero(pa.rows(), b);
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    VectorXd diff = pa.col(i) - pc.col(i);
    double dot = pa.col(i).dot(pr.col(i));
    total += diff.squaredNorm() +
             beta * (dot * dot - zeta * pa.col(i).squaredNorm() - zeta * pr.col(i).squaredNorm());
    if (want_grad) {
      parts.ga.col(i) = (2.0 * diff + beta * (2.0 * dot * pr.col(i) - 2.0 * zeta * pa.col(i))) * inv_b;
      parts.gc.col(i) = -2.0 * diff * inv_b;
      parts.gr.col(i) = beta * (2.0 * dot * pa.col(i) - 2.0 * zeta * pr.col(i)) * inv_b;
    }
  }
  parts.loss = total * inv_b;
  return parts;
}
}  // namespace

double laplace_loss(const LaplaceEncoder& enc, const MatrixXd& anchors, const MatrixXd& closes,
                    const MatrixXd& randoms, double beta, double zeta) {
  if (anchors.cols() != closes.cols() || anchors.cols() != randoms.cols())
    throw ArgumentError("laplace_loss: batch length mismatch");
  MatrixXd pa = enc.embed_batch(anchors);
  MatrixXd pc = enc.embed_batch(closes);
  MatrixXd pr = enc.embed_batch(randoms);
  return pair_loss(pa, pc, pr, beta, zeta, false).loss;
}

double laplace_grad(const LaplaceEncoder& enc, const MatrixXd& anchors, const MatrixXd& closes,
                    const MatrixXd& randoms, double beta, double zeta, std::vector<double>* grad) {
  if (anchors.cols() != closes.cols() || anchors.cols() != randoms.cols())
    throw ArgumentError("laplace_grad: batch length mismatch");
  grad->assign(enc.param_count(), 0.0);

  LaplaceBackprop ca, cc, cr;
  LaplaceBackprop::forward(enc, anchors, &ca);
  LaplaceBackprop::forward(enc, closes, &cc);
  LaplaceBackprop::forward(enc, randoms, &cr);
  PairLossParts parts = pair_loss(ca.out, cc.out, cr.out, beta, zeta, true);
  LaplaceBackprop::backward(enc, anchors, ca, parts.ga, grad);
  LaplaceBackprop::backward(enc, closes, cc, parts.gc, grad);
  LaplaceBackprop::backward(enc, randoms, cr, parts.gr, grad);
  return parts.loss;
}

// ---------------------------------------------------------------------------
// Pair sampling
// ---------------------------------------------------------------------------

std::vector<double> offset_probabilities(double kappa, int limit) {
  if (limit < 1) throw ArgumentError("offset_probabilities: empty support");
  std::vector<double> p(static_cast<size_t>(limit));
  double w = 1.0, sum = 0.0;
  for (int u = 0; u < limit; ++u) {
    w *= kappa;
    p[static_cast<size_t>(u)] = w;
    sum += w;
  }
  for (double& x : p) x /= sum;
  return p;
}

StateSequence::StateSequence(const DataLog& log) {
  if (log.empty()) throw DataError("StateSequence: empty log");
  const auto& ts = log.transitions();
  size_t i = 0;
  while (i < ts.size()) {
    size_t begin = i;
    size_t traj_first_state = states_.size();
    while (i < ts.size() && (i == begin || !ts[i].episode_start)) {
      states_.push_back(ts[i].state);
      if (ts[i].terminal) {
        ++i;
        break;
      }
      ++i;
    }
    states_.push_back(ts[i - 1].next_state);  // final state of the trajectory
    size_t traj_len = states_.size() - traj_first_state;
    for (size_t k = 0; k + 1 < traj_len; ++k)
      anchors_.push_back(Anchor{traj_first_state + k, static_cast<int>(traj_len - 1 - k)});
  }
}

void StateSequence::sample_pair(double kappa, int window, RandomStream& rng, StateVec* anchor,
                                StateVec* close) const {
  if (window < 1) throw ArgumentError("sample_pair: window must be >= 1");
  const Anchor& a = anchors_[rng.below(anchors_.size())];
  int limit = std::min(window, a.remaining);
  std::vector<double> probs = offset_probabilities(kappa, limit);
  double u = rng.uniform();
  double cum = 0.0;
  int off = limit;
  for (int k = 0; k < limit; ++k) {
    cum += probs[static_cast<size_t>(k)];
    if (u < cum) {
      off = k + 1;
      break;
    }
  }
  *anchor = states_[a.state_pos];
  *close = states_[a.state_pos + static_cast<size_t>(off)];
}

const StateVec& StateSequence::sample_state(RandomStream& rng) const {
  return states_[rng.below(states_.size())];
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

LaplaceConfig laplace_preset(EnvName name) {
  LaplaceConfig c;
  switch (name) {
    case EnvName::acrobot:
    case EnvName::acrobot_changed:
      c.kappa = 0.8;
      c.beta = 5.0;
      c.zeta = 0.5;
      c.learning_rate = 3e-5;
      c.traj_window = 20;
      break;
    case EnvName::puddleworld:
      c.kappa = 0.8;
      c.beta = 5.0;
      c.zeta = 0.05;
      c.learning_rate = 3e-4;
      c.traj_window = 10;
      break;
    case EnvName::cartpole:
      c.kappa = 0.8;
      c.beta = 5.0;
      c.zeta = 0.05;
      c.learning_rate = 3e-5;
      c.traj_window = 50;
      break;
  }
  return c;
}

LaplaceTrainResult train_laplace(const DataLog& log, const LaplaceConfig& config, uint64_t seed) {
  if (log.empty()) throw DataError("train_laplace: empty log");
  StateSequence seq(log);
  if (seq.anchor_count() == 0) throw DataError("train_laplace: no trajectory has two states");

  LaplaceTrainResult result;
  const int dim = log.spec().state_dim;
  LaplaceEncoder enc(dim, config.hidden1, config.hidden2, config.out_dim,
                     derive_seed(seed, {0xEC}));

  // degenerate-log warning: every state identical
  bool all_same = true;
  for (const StateVec& s : seq.all_states())
    if (!(s == seq.all_states()[0])) {
      all_same = false;
      break;
    }
  if (all_same)
    result.warnings.push_back("training log is degenerate: all states identical");

  result.encoder = enc;  // best checkpoint so far
  if (config.max_steps <= 0) return result;

  RandomStream rng(derive_seed(seed, {0x7A}));
  std::vector<double> m(enc.param_count(), 0.0), v(enc.param_count(), 0.0);
  std::vector<double> grad;
  MatrixXd xa(dim, config.batch_size), xc(dim, config.batch_size), xr(dim, config.batch_size);

  double best = std::numeric_limits<double>::infinity();
  int streak = 0;
  double window_sum = 0.0;
  int window_n = 0;

  for (int step = 1; step <= config.max_steps; ++step) {
    StateVec a, c;
    for (int j = 0; j < config.batch_size; ++j) {
      seq.sample_pair(config.kappa, config.traj_window, rng, &a, &c);
      const StateVec& r = seq.sample_state(rng);
      for (int d = 0; d < dim; ++d) {
        xa(d, j) = a[d];
        xc(d, j) = c[d];
        xr(d, j) = r[d];
      }
    }
    double loss = laplace_grad(enc, xa, xc, xr, config.beta, config.zeta, &grad);
    adam_update(m, v, grad, step, config.learning_rate, 0.9, enc.params());
    window_sum += loss;
    ++window_n;
    result.steps_run = step;

    if (step % config.check_interval == 0) {
      double avg = window_sum / window_n;
      window_sum = 0.0;
      window_n = 0;
      if (avg < best) {
        best = avg;
        result.encoder = enc;
        streak = 0;
      } else {
        ++streak;
        if (streak >= config.patience) {
          result.converged_early = true;
          break;
        }
      }
    }
  }
  result.best_checked_loss = best;
  return result;
}

double dynamics_awareness(const LaplaceEncoder& enc, const DataLog& log, uint64_t seed,
                          int n_anchors, std::vector<std::string>* warnings) {
  if (log.empty()) throw DataError("dynamics_awareness: empty log");
  RandomStream rng(seed);
  const auto& ts = log.transitions();
  const int dim = log.spec().state_dim;
  MatrixXd xa(dim, n_anchors), xr(dim, n_anchors), xn(dim, n_anchors);
  for (int i = 0; i < n_anchors; ++i) {
    const Transition& t = ts[rng.below(ts.size())];
    const Transition& other = ts[rng.below(ts.size())];
    for (int d = 0; d < dim; ++d) {
      xa(d, i) = t.state[d];
      xr(d, i) = other.state[d];
      xn(d, i) = t.next_state[d];
    }
  }
  MatrixXd pa = enc.embed_batch(xa);
  double sum_rand = (pa - enc.embed_batch(xr)).colwise().norm().sum();
  double sum_next = (pa - enc.embed_batch(xn)).colwise().norm().sum();
  if (sum_rand == 0.0) {
    if (warnings) warnings->push_back("dynamics_awareness: constant encoder, reporting 0");
    return 0.0;
  }
  return (sum_rand - sum_next) / sum_rand;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {
constexpr char kEncMagic[8] = {'C', 'T', 'E', 'N', 'C', '0', '0', '1'};
}

void LaplaceEncoder::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("encoder: cannot open for write: " + path);
  os.write(kEncMagic, 8);
  nlohmann::json h{{"in", in_}, {"h1", h1_}, {"h2", h2_}, {"out", out_}};
  std::string header = h.dump();
  uint32_t hlen = static_cast<uint32_t>(header.size());
  os.write(reinterpret_cast<const char*>(&hlen), 4);
  os.write(header.data(), hlen);

  // matrices written row-major
  Layout l = layout();
  auto write_mat = [&](int off, int rows, int cols) {
    CMap m(&params_[static_cast<size_t>(off)], rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double x = m(r, c);
        os.write(reinterpret_cast<const char*>(&x), sizeof(double));
      }
  };
  write_mat(l.w1_off, h1_, in_);
  write_mat(l.b1_off, h1_, 1);
  write_mat(l.w2_off, h2_, h1_);
  write_mat(l.b2_off, h2_, 1);
  write_mat(l.w3_off, out_, h2_);
  write_mat(l.b3_off, out_, 1);
  if (!os) throw FormatError("encoder: write failed: " + path);
}

LaplaceEncoder LaplaceEncoder::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("encoder: cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kEncMagic, 8) != 0)
    throw FormatError("encoder: bad magic bytes: " + path);
  uint32_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), 4);
  std::string header(hlen, '\0');
  is.read(header.data(), hlen);
  if (!is) throw FormatError("encoder: truncated header: " + path);
  nlohmann::json h = nlohmann::json::parse(header, nullptr, false);
  if (h.is_discarded()) throw FormatError("encoder: corrupt header: " + path);

  LaplaceEncoder e(h.at("in"), h.at("h1"), h.at("h2"), h.at("out"), 0);
  Layout l = e.layout();
  auto read_mat = [&](int off, int rows, int cols) {
    MMap m(&e.params_[static_cast<size_t>(off)], rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double x;
        is.read(reinterpret_cast<char*>(&x), sizeof(double));
        m(r, c) = x;
      }
  };
  read_mat(l.w1_off, e.h1_, e.in_);
  read_mat(l.b1_off, e.h1_, 1);
  read_mat(l.w2_off, e.h2_, e.h1_);
  read_mat(l.b2_off, e.h2_, 1);
  read_mat(l.w3_off, e.out_, e.h2_);
  read_mat(l.b3_off, e.out_, 1);
  if (!is) throw FormatError("encoder: truncated parameters: " + path);
  return e;
}

uint64_t LaplaceEncoder::param_hash() const {
  uint64_t h = 1469598103934665603ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(params_.data());
  for (size_t i = 0; i < params_.size() * sizeof(double); ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace caltune
