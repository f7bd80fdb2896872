#pragma once

// Deterministic random number generation for the whole toolkit.
//
// Generator: xoshiro256++ (Blackman & Vigna), seeded through SplitMix64.
// Replicate r of an experiment with master seed s draws from the stream
// derived from (s, r), so results do not depend on thread scheduling.
// All sampling helpers (uniforms, exponentials, discrete picks, shuffles)
// are implemented here rather than with <random> distributions, whose
// output is not specified bit-for-bit across standard libraries.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mbfrag {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  // Independent stream for replicate `stream` of master seed `seed`.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    std::uint64_t mixed = splitmix64_next(sm) ^ stream;
    return Rng(splitmix64_next(mixed));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1], safe as argument of log.
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) {
    if (!(rate > 0)) throw std::invalid_argument("exponential: rate must be > 0");
    return -std::log(uniform_pos()) / rate;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n == 0");
    std::uint64_t x, r;
    do {
      x = next_u64();
      r = x % n;
    } while (x - r > std::uint64_t(0) - n);
    return r;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn with probability weights[i] / sum(weights).
  std::size_t discrete(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    return discrete(weights, total);
  }

  std::size_t discrete(const std::vector<double>& weights, double total) {
    if (!(total > 0)) throw std::invalid_argument("discrete: total weight must be > 0");
    double u = uniform() * total;
    double acc = 0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? throw std::invalid_argument("discrete: empty") : weights.size() - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace mbfrag
