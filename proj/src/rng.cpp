#include "hssalt/rng.hpp"

#include <cmath>
#include <numbers>

namespace hssalt {

double RandomStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // Box-Muller.
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double RandomStream::standard_exponential() { return -std::log(uniform()); }

RandomStream stream_for(std::uint64_t seed, std::uint64_t replication_index, std::uint64_t substream) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(replication_index), hi(replication_index),
                    lo(substream), hi(substream), 0x68535341u};
  return RandomStream(seq);
}

}  // namespace hssalt
