#include <cmath>
#include <vector>

#include "caltune/rng.hpp"
#include "caltune/weights.hpp"
#include "doctest.h"

using namespace caltune;

TEST_CASE("first adam step with zero moments cancels bias correction") {
  AdamScalar r = adam_update(0.0, 0.0, 1.0, 1, 0.1, 0.9);
  CHECK(r.m == doctest::Approx(0.1));
  CHECK(r.v == doctest::Approx(0.001));
  CHECK(r.dw == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("zero gradient with zero moments moves nothing") {
  AdamScalar r = adam_update(0.0, 0.0, 0.0, 5, 0.1, 0.9);
  CHECK(r.dw == 0.0);
}

TEST_CASE("adam on a scalar quadratic matches an independent reference") {
  // reference: plain loop over the textbook update equations
  double w_ref = 1.0, m_ref = 0.0, v_ref = 0.0;
  const double alpha = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> ref_path;
  for (int t = 1; t <= 100; ++t) {
    double g = 2.0 * w_ref;
    m_ref = b1 * m_ref + (1 - b1) * g;
    v_ref = b2 * v_ref + (1 - b2) * g * g;
    double mh = m_ref / (1 - std::pow(b1, t));
    double vh = v_ref / (1 - std::pow(b2, t));
    w_ref -= alpha * mh / (std::sqrt(vh) + eps);
    ref_path.push_back(w_ref);
  }

  double w = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 100; ++t) {
    AdamScalar r = adam_update(m, v, 2.0 * w, t, alpha, b1, b2, eps);
    m = r.m;
    v = r.v;
    w += r.dw;
    CHECK(std::abs(w - ref_path[static_cast<size_t>(t - 1)]) < 1e-10);
  }
}

TEST_CASE("vector adam matches the scalar form coordinate-wise") {
  std::vector<double> m{0.0, 0.5}, v{0.0, 0.2}, g{1.0, -2.0}, w{0.0, 3.0};
  auto ms = m, vs = v, ws = w;
  adam_update(m, v, g, 7, 0.05, 0.9, w);
  for (int i = 0; i < 2; ++i) {
    AdamScalar r = adam_update(ms[i], vs[i], g[i], 7, 0.05, 0.9);
    CHECK(m[static_cast<size_t>(i)] == doctest::Approx(r.m));
    CHECK(v[static_cast<size_t>(i)] == doctest::Approx(r.v));
    CHECK(w[static_cast<size_t>(i)] == doctest::Approx(ws[i] + r.dw));
  }
}

TEST_CASE("sparse store reproduces dense adam exactly") {
  const int n = 40;
  const double alpha = 0.03, init = 0.5;
  for (double beta1 : {0.0, 0.9}) {
    SparseAdamWeights store(n, init, alpha, beta1);
    std::vector<double> w(n, init), m(n, 0.0), v(n, 0.0);
    RandomStream rng(314);

    for (int t = 1; t <= 300; ++t) {
      // sparse gradient on a few random coordinates
      std::vector<double> g(n, 0.0);
      int k = 1 + static_cast<int>(rng.below(4));
      for (int j = 0; j < k; ++j) g[rng.below(n)] = rng.uniform(-1.0, 1.0);

      store.begin_step();
      for (int i = 0; i < n; ++i)
        if (g[static_cast<size_t>(i)] != 0.0)
          store.grad_slot(store.slot_for(i), g[static_cast<size_t>(i)]);

      // dense reference updates every coordinate every step
      double bc1 = 1 - std::pow(beta1, t), bc2 = 1 - std::pow(0.999, t);
      for (int i = 0; i < n; ++i) {
        size_t u = static_cast<size_t>(i);
        m[u] = beta1 * m[u] + (1 - beta1) * g[u];
        v[u] = 0.999 * v[u] + 0.001 * g[u] * g[u];
        w[u] -= alpha * (m[u] / bc1) / (std::sqrt(v[u] / bc2) + 1e-8);
      }

      if (t % 37 == 0 || t == 300) {
        for (int i = 0; i < n; ++i)
          CHECK(store.read(i) == doctest::Approx(w[static_cast<size_t>(i)]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("untouched coordinates never move from the optimistic value") {
  SparseAdamWeights store(100, 2.5, 0.1, 0.9);
  for (int t = 0; t < 50; ++t) {
    store.begin_step();
    store.grad_slot(store.slot_for(3), 1.0);
  }
  CHECK(store.read(7) == 2.5);
  CHECK(store.read(3) != 2.5);
}

TEST_CASE("accumulating trace decays, accumulates and drops entries") {
  SparseAdamWeights store(32, 0.0, 0.1, 0.0);
  AccumulatingTrace trace(&store, 1e-8);

  store.begin_step();
  trace.add(4, 1.0);
  trace.add(4, 1.0);  // accumulating: same index adds up
  trace.add(9, 1.0);
  CHECK(trace.value_at(4) == doctest::Approx(2.0));
  trace.decay(0.5);
  CHECK(trace.value_at(4) == doctest::Approx(1.0));
  CHECK(trace.value_at(9) == doctest::Approx(0.5));

  trace.clear();
  CHECK(trace.support() == 0);
  CHECK(trace.value_at(4) == 0.0);

  // entries below the drop threshold disappear on the next gradient pass
  store.begin_step();
  trace.add(1, 1.0);
  for (int i = 0; i < 40; ++i) trace.decay(0.5);
  trace.apply_td_gradient(1.0);
  CHECK(trace.support() == 0);
}
