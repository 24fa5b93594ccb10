#pragma once

#include <cstdint>

namespace mvpforge {

// Stateless keyed generator: the value at (seed, stream, counter) depends on
// nothing else, so any position of any stream can be computed independently.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Top 53 bits mapped to [0, 1).
inline double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next() { return counter_hash(seed_, stream_, counter_++); }

  // Unbiased integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace mvpforge
