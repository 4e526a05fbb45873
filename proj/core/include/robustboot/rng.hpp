#pragma once

#include <cstdint>
#include <optional>

namespace robustboot {

/// Deterministic counter-based generator (Philox-style 4x32 block cipher,
/// 10 rounds). Every stream is identified by a 64-bit key derived from a
/// user seed plus substream ids, so nested Monte Carlo layers can draw from
/// provably disjoint streams: substream(k) of substream(j) of seed s is a
/// pure function of (s, j, k).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed) {}

  /// Independent stream derived from this stream's key and `id`.
  Rng substream(std::uint64_t id) const { return Rng(derive(key_, id)); }

  /// Hash-combine used for substream keys; exposed so call sites can derive
  /// keys without instantiating generators.
  static std::uint64_t derive(std::uint64_t key, std::uint64_t id);

  std::uint64_t next_u64();

  /// Uniform on [0,1), 53 random bits.
  double next_double();

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform on {0, 1, ..., n-1}; unbiased via rejection.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (pair cached).
  double gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint32_t block_[4] = {0, 0, 0, 0};
  int block_pos_ = 4;  // 4 = exhausted
  std::optional<double> spare_gaussian_;

  void refill();
};

}  // namespace robustboot
