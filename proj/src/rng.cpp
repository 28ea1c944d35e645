#include "sscb/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sscb/error.hpp"

namespace sscb {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5ca1ab1eU};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(make_engine(seed, stream)) {}

std::size_t Rng::index(std::size_t n) {
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  if (in.fail()) throw ParseError("corrupt RNG state", 0);
}

RngStreams::RngStreams(std::uint64_t seed)
    : context(seed, static_cast<std::uint64_t>(Stream::kContext)),
      reward(seed, static_cast<std::uint64_t>(Stream::kReward)),
      policy(seed, static_cast<std::uint64_t>(Stream::kPolicy)),
      noise(seed, static_cast<std::uint64_t>(Stream::kNoise)),
      init(seed, static_cast<std::uint64_t>(Stream::kInit)) {}

}  // namespace sscb
