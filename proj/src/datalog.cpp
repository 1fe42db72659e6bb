#include "caltune/datalog.hpp"

#include <cstring>
#include <fstream>

namespace caltune {

namespace {
constexpr char kMagic[8] = {'C', 'T', 'L', 'O', 'G', '0', '0', '1'};

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("data log: truncated header");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}
}  // namespace

PolicyQuality quality_from_string(const std::string& s) {
  if (s == "near_optimal") return PolicyQuality::near_optimal;
  if (s == "medium") return PolicyQuality::medium;
  if (s == "naive") return PolicyQuality::naive;
  if (s == "random") return PolicyQuality::random;
  throw ConfigError("unknown policy quality: " + s);
}

std::string to_string(PolicyQuality q) {
  switch (q) {
    case PolicyQuality::near_optimal: return "near_optimal";
    case PolicyQuality::medium: return "medium";
    case PolicyQuality::naive: return "naive";
    case PolicyQuality::random: return "random";
  }
  return "?";
}

void DataLog::push(const Transition& t) {
  if (t.terminal && t.episode_start)
    throw DataError("data log: transition cannot be both terminal and episode start");
  if (t.episode_start) boundaries_.push_back(transitions_.size());
  transitions_.push_back(t);
}

std::vector<double> DataLog::episode_returns() const {
  std::vector<double> out;
  double g = 0.0;
  bool open = false;
  for (size_t i = 0; i < transitions_.size(); ++i) {
    const Transition& t = transitions_[i];
    if (t.episode_start && open) {
      out.push_back(g);
      g = 0.0;
    }
    open = true;
    g += t.reward;
    if (t.terminal) {
      out.push_back(g);
      g = 0.0;
      open = false;
    }
  }
  if (open) out.push_back(g);
  return out;
}

double DataLog::min_episode_return() const {
  std::vector<double> rs = episode_returns();
  if (rs.empty()) throw DataError("data log: no episodes");
  double mn = rs[0];
  for (double r : rs) mn = std::min(mn, r);
  return mn;
}

void DataLog::validate() const {
  if (transitions_.empty()) throw DataError("data log: empty");
  if (!transitions_[0].episode_start) throw DataError("data log: first record must start an episode");
  size_t b = 0;
  for (size_t i = 0; i < transitions_.size(); ++i) {
    if (transitions_[i].episode_start) {
      if (b >= boundaries_.size() || boundaries_[b] != i)
        throw DataError("data log: boundary list inconsistent with flags");
      ++b;
    }
  }
  if (b != boundaries_.size()) throw DataError("data log: extra boundaries");
}

nlohmann::json DataLog::header_json() const {
  return {{"env", to_string(spec_.name)},
          {"action_count", spec_.action_count},
          {"discount", spec_.discount},
          {"episodic", spec_.episodic},
          {"state_dim", spec_.state_dim},
          {"quality", to_string(quality_)},
          {"seed", seed_},
          {"n_data", transitions_.size()},
          {"episodes", boundaries_.size()}};
}

void DataLog::write(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("data log: cannot open for write: " + path);
  os.write(kMagic, 8);
  std::string header = header_json().dump();
  put_u32(os, static_cast<uint32_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));

  const int dim = spec_.state_dim;
  for (const Transition& t : transitions_) {
    os.write(reinterpret_cast<const char*>(t.state.data()), sizeof(double) * dim);
    int32_t a = t.action;
    os.write(reinterpret_cast<const char*>(&a), sizeof(a));
    os.write(reinterpret_cast<const char*>(&t.reward), sizeof(double));
    os.write(reinterpret_cast<const char*>(t.next_state.data()), sizeof(double) * dim);
    os.write(reinterpret_cast<const char*>(&t.gamma), sizeof(double));
    uint8_t flags = (t.terminal ? 1 : 0) | (t.episode_start ? 2 : 0);
    os.write(reinterpret_cast<const char*>(&flags), 1);
  }
  if (!os) throw FormatError("data log: write failed: " + path);
}

DataLog DataLog::read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("data log: cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("data log: bad magic bytes: " + path);
  uint32_t hlen = get_u32(is);
  std::string header(hlen, '\0');
  is.read(header.data(), hlen);
  if (!is) throw FormatError("data log: truncated header: " + path);

  nlohmann::json h = nlohmann::json::parse(header, nullptr, false);
  if (h.is_discarded()) throw FormatError("data log: corrupt header JSON: " + path);

  EnvSpec spec = env_spec(env_name_from_string(h.at("env").get<std::string>()));
  DataLog log(spec, quality_from_string(h.at("quality").get<std::string>()),
              h.at("seed").get<uint64_t>());
  size_t n = h.at("n_data").get<size_t>();
  const int dim = spec.state_dim;

  for (size_t i = 0; i < n; ++i) {
    Transition t;
    t.state = StateVec(dim);
    t.next_state = StateVec(dim);
    is.read(reinterpret_cast<char*>(t.state.data()), sizeof(double) * dim);
    int32_t a = 0;
    is.read(reinterpret_cast<char*>(&a), sizeof(a));
    t.action = a;
    is.read(reinterpret_cast<char*>(&t.reward), sizeof(double));
    is.read(reinterpret_cast<char*>(t.next_state.data()), sizeof(double) * dim);
    is.read(reinterpret_cast<char*>(&t.gamma), sizeof(double));
    uint8_t flags = 0;
    is.read(reinterpret_cast<char*>(&flags), 1);
    if (!is) throw FormatError("data log: truncated records: " + path);
    t.terminal = flags & 1;
    t.episode_start = flags & 2;
    log.push(t);
  }
  log.validate();
  return log;
}

}  // namespace caltune
