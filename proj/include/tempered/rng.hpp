#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace tempered {

/// Reproducible random stream keyed by (seed, stream_id).
///
/// Monte Carlo drivers give every path its own stream_id, so results do not
/// depend on how paths are spread over threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x7e3f1a5bu};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  /// Uniform on (0, 1]; safe under log().
  double uniform_pos() { return 1.0 - uniform(); }
  double normal() { return normal_(engine_); }
  /// Exponential with the given rate; rate 0 gives +inf.
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform_pos()) / rate;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace tempered
