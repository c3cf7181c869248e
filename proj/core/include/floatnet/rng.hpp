#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace floatnet {

// SplitMix64 (Steele, Lea, Flood). Used for seeding and for deriving
// per-row substream seeds; never used as the main simulation stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Substream rule: the seed of substream k under base seed s is the
// (k+1)-th output of SplitMix64(s). Sweeps use one substream per row.
inline std::uint64_t substream_seed(std::uint64_t base_seed, std::uint64_t stream_index) {
  SplitMix64 sm(base_seed);
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i <= stream_index; ++i) out = sm.next();
  return out;
}

// xoshiro256++ (Blackman, Vigna). Fixed bit-level behaviour on every
// platform, unlike the standard library distributions.
class Xoshiro256PlusPlus {
 public:
  explicit Xoshiro256PlusPlus(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : state_) word = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 significant bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased via masked rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = ~std::uint64_t{0} >> __builtin_clzll((n - 1) | 1);
    std::uint64_t v;
    do {
      v = next() & mask;
    } while (v >= n);
    return v;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_;
};

// Samples an index from cumulative probabilities built once per table.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> probabilities) {
    cumulative_.reserve(probabilities.size());
    double acc = 0.0;
    for (double p : probabilities) {
      acc += p;
      cumulative_.push_back(acc);
    }
  }

  int sample(Xoshiro256PlusPlus& rng) const {
    const double u = rng.next_double() * cumulative_.back();
    for (std::size_t i = 0; i + 1 < cumulative_.size(); ++i) {
      if (u < cumulative_[i]) return static_cast<int>(i);
    }
    return static_cast<int>(cumulative_.size()) - 1;
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace floatnet
