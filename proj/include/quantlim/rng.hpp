#pragma once

#include <cmath>
#include <cstdint>

namespace quantlim {

// splitmix64 finalizer; the counter-based streams below are built from it so
// every (key, index) pair yields the same draw regardless of evaluation order.
inline std::uint64_t mix_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) {
  return mix_u64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + mix_u64(b)));
}

// Deterministic stream of doubles keyed by an arbitrary 64-bit key.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static CounterRng keyed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return CounterRng(combine_keys(combine_keys(seed, stream), index));
  }

  std::uint64_t next_u64() { return mix_u64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller (pair cached)
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double ang = 6.283185307179586477 * u2;
    spare_ = r * std::sin(ang);
    has_spare_ = true;
    return r * std::cos(ang);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace quantlim
