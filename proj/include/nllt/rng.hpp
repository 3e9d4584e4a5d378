#pragma once

#include <cstdint>
#include <limits>

namespace nllt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Random stream for sample j of a run, keyed by (seed, j). A sample's draws
/// depend only on its key, so any partition of sample indices over worker
/// threads produces the same values. Core generator is xoshiro256**.
class SampleStream {
 public:
  using result_type = std::uint64_t;

  SampleStream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t key = seed;
    const std::uint64_t salt = splitmix64(key) ^ (index * 0xD1B54A32D192ED03ULL);
    std::uint64_t mix = salt;
    for (auto& word : s_) word = splitmix64(mix);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
};

}  // namespace nllt
