#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

namespace aac {

// Seeded random stream. Every stochastic component owns one; runs are
// reproducible as long as streams are consumed in a fixed order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0)
      : eng_(splitmix64(seed)), seed_(seed) {}

  // Decorrelated child stream, e.g. one per population member.
  Rng fork(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL)));
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  // Inclusive on both ends.
  long uniform_int(long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(eng_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  long poisson(double lambda) {
    return std::poisson_distribution<long>(lambda)(eng_);
  }

  template <typename Seq>
  void shuffle(Seq& seq) {
    std::shuffle(seq.begin(), seq.end(), eng_);
  }

  std::mt19937_64& engine() { return eng_; }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 eng_;
  std::uint64_t seed_ = 0;
};

}  // namespace aac
