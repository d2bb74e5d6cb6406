#pragma once

#include <cstdint>
#include <random>

namespace hssalt {

/// Reproducible random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Variates are derived here rather than through the
/// implementation-defined <random> distributions, so a stream yields the same
/// numbers on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::seed_seq& seq) : engine_(seq) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double standard_normal();
  double standard_exponential();
  /// Index j with probability weights[j]; weights must sum to one.
  template <typename Range>
  std::size_t categorical(const Range& weights) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t j = 0;
    for (double w : weights) {
      acc += w;
      if (u < acc) return j;
      ++j;
    }
    return j - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Stream for one replication. Streams for distinct (seed, index, substream)
/// triples are seeded independently through std::seed_seq, so a replication's
/// draws never depend on which thread ran it or in what order. substream
/// distinguishes redraws and auxiliary uses within one replication.
RandomStream stream_for(std::uint64_t seed, std::uint64_t replication_index, std::uint64_t substream = 0);

}  // namespace hssalt
