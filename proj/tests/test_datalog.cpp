#include <cstdio>
#include <fstream>

#include "caltune/datalog.hpp"
#include "caltune/rng.hpp"
#include "doctest.h"

using namespace caltune;

namespace {
DataLog random_log(int n, uint64_t seed) {
  DataLog log(env_spec(EnvName::puddleworld), PolicyQuality::medium, seed);
  RandomStream rng(seed);
  int since_start = 0;
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.state = StateVec{rng.uniform(), rng.uniform()};
    t.next_state = StateVec{rng.uniform(), rng.uniform()};
    t.action = rng.action(4);
    t.reward = rng.uniform(-2.0, 0.0);
    t.episode_start = (since_start == 0);
    t.terminal = (since_start >= 3 && rng.uniform() < 0.3);
    t.gamma = t.terminal ? 0.0 : 1.0;
    since_start = t.terminal ? 0 : since_start + 1;
    log.push(t);
  }
  return log;
}
}  // namespace

TEST_CASE("data log round-trips bit-exactly through its file format") {
  DataLog log = random_log(200, 31);
  log.validate();
  std::string path = "test_log_roundtrip.bin";
  log.write(path);
  DataLog back = DataLog::read(path);
  std::remove(path.c_str());

  REQUIRE(back.size() == log.size());
  CHECK(back.spec().name == log.spec().name);
  CHECK(back.quality() == log.quality());
  CHECK(back.seed() == log.seed());
  CHECK(back.boundaries() == log.boundaries());
  for (size_t i = 0; i < log.size(); ++i) {
    CHECK(back[i].state == log[i].state);
    CHECK(back[i].next_state == log[i].next_state);
    CHECK(back[i].action == log[i].action);
    CHECK(back[i].reward == log[i].reward);
    CHECK(back[i].gamma == log[i].gamma);
    CHECK(back[i].terminal == log[i].terminal);
    CHECK(back[i].episode_start == log[i].episode_start);
  }
}

TEST_CASE("corrupted magic bytes raise a format error") {
  DataLog log = random_log(10, 5);
  std::string path = "test_log_corrupt.bin";
  log.write(path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(DataLog::read(path), FormatError);
  std::remove(path.c_str());
}

TEST_CASE("truncated files raise a format error") {
  DataLog log = random_log(50, 6);
  std::string path = "test_log_trunc.bin";
  log.write(path);
  {
    std::ifstream in(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(all.data(), static_cast<std::streamsize>(all.size() - 40));
  }
  CHECK_THROWS_AS(DataLog::read(path), FormatError);
  std::remove(path.c_str());
}

TEST_CASE("header records the requested transition count") {
  DataLog log = random_log(5000, 8);
  CHECK(log.header_json()["n_data"] == 5000);
}

TEST_CASE("episode returns follow the boundary structure") {
  DataLog log(env_spec(EnvName::acrobot), PolicyQuality::near_optimal, 1);
  auto add = [&](double r, bool start, bool term) {
    Transition t;
    t.state = StateVec(6);
    t.next_state = StateVec(6);
    t.reward = r;
    t.episode_start = start;
    t.terminal = term;
    t.gamma = term ? 0.0 : 1.0;
    log.push(t);
  };
  add(-1, true, false);
  add(-1, false, false);
  add(-1, false, true);   // episode return -3
  add(-1, true, false);
  add(-1, false, true);   // episode return -2
  add(-1, true, false);   // unfinished tail, partial return -1
  auto rs = log.episode_returns();
  REQUIRE(rs.size() == 3);
  CHECK(rs[0] == -3.0);
  CHECK(rs[1] == -2.0);
  CHECK(rs[2] == -1.0);
  CHECK(log.min_episode_return() == -3.0);
  CHECK(log.episode_count() == 3);
}

TEST_CASE("a transition cannot both start and terminate") {
  DataLog log(env_spec(EnvName::acrobot), PolicyQuality::random, 0);
  Transition t;
  t.state = StateVec(6);
  t.next_state = StateVec(6);
  t.episode_start = true;
  t.terminal = true;
  CHECK_THROWS_AS(log.push(t), DataError);
}
