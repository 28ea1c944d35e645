#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace sscb {

// Independent consumers of randomness inside one simulation. Each gets its own
// engine so that changing how often one consumer draws never perturbs another.
enum class Stream : std::uint32_t {
  kContext = 0,
  kReward = 1,
  kPolicy = 2,
  kNoise = 3,
  kInit = 4,
};

// Seeded 64-bit Mersenne engine with portable uniform/normal transforms.
// Distribution objects from <random> are avoided on purpose: their output is
// implementation-defined and std::normal_distribution caches a spare draw,
// which would leak state past a checkpoint.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  // Standard normal via Box-Muller, one value per call.
  double normal();

  std::uint64_t next_u64() { return engine_(); }

  std::string serialize() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

struct RngStreams {
  explicit RngStreams(std::uint64_t seed);

  Rng context;
  Rng reward;
  Rng policy;
  Rng noise;
  Rng init;
};

}  // namespace sscb
