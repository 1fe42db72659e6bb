#ifndef CALTUNE_DATALOG_HPP
#define CALTUNE_DATALOG_HPP

#include <string>
#include <vector>

#include "caltune/common.hpp"
#include "caltune/envs.hpp"

#include "json.hpp"

namespace caltune {

enum class PolicyQuality { near_optimal, medium, naive, random };

PolicyQuality quality_from_string(const std::string& s);
std::string to_string(PolicyQuality q);

struct Transition {
  StateVec state;
  int action = 0;
  double reward = 0.0;
  StateVec next_state;
  // Discount used for bootstrapping from next_state: 0 on terminal, the task
  // discount otherwise.
  double gamma = 0.0;
  bool terminal = false;
  bool episode_start = false;
};

/// Ordered offline dataset with trajectory structure.
class DataLog {
 public:
  DataLog() = default;
  DataLog(EnvSpec spec, PolicyQuality quality, uint64_t seed)
      : spec_(spec), quality_(quality), seed_(seed) {}

  const EnvSpec& spec() const { return spec_; }
  PolicyQuality quality() const { return quality_; }
  uint64_t seed() const { return seed_; }

  void push(const Transition& t);
  size_t size() const { return transitions_.size(); }
  bool empty() const { return transitions_.empty(); }
  const Transition& operator[](size_t i) const { return transitions_[i]; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  /// Start index of each trajectory, in time order.
  const std::vector<size_t>& boundaries() const { return boundaries_; }
  size_t episode_count() const { return boundaries_.size(); }

  /// Sum of rewards per boundary-delimited segment (the final, possibly
  /// unfinished segment included).
  std::vector<double> episode_returns() const;
  double min_episode_return() const;

  /// Checks flag/boundary consistency; throws DataError on violation.
  void validate() const;

  void write(const std::string& path) const;
  static DataLog read(const std::string& path);

  nlohmann::json header_json() const;

 private:
  EnvSpec spec_;
  PolicyQuality quality_ = PolicyQuality::random;
  uint64_t seed_ = 0;
  std::vector<Transition> transitions_;
  std::vector<size_t> boundaries_;
};

}  // namespace caltune

#endif
