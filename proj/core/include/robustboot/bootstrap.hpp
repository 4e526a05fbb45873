#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "robustboot/estimators.hpp"
#include "robustboot/measure.hpp"

namespace robustboot {

/// Dyadic block schedule: b is constant on [2^q, 2^{q+1}) and grows like
/// 2^{q * exponent}, so b(n) -> infinity along powers of two while staying
/// inside the admissible polynomial band.
struct BlockSchedule {
  std::size_t n = 0;
  std::size_t b = 0;    // block length
  std::size_t ell = 0;  // block count, ceil(n / b)
};

/// exponent in (0, 0.45]; 0.25 is the default for the one-dimensional
/// regime, values up to 0.45 reach the d-dimensional schedule.
BlockSchedule block_schedule(std::size_t n, double block_exponent = 0.25);

struct BootstrapScheme {
  enum class Kind { kEfron, kMovingBlock };
  Kind kind = Kind::kEfron;
  double block_exponent = 0.25;              // moving block only
  std::optional<std::size_t> resample_size;  // Efron m, defaults to n
  /// Start indices default to {1..n} with circular wrap; this restricts them
  /// to {1..n-b+1} (no wrap-around blocks).
  bool restrict_starts = false;
};

std::vector<std::size_t> efron_indices(std::size_t n, std::size_t m, std::uint64_t seed);

std::vector<std::size_t> mbb_indices(std::size_t n, const BlockSchedule& schedule,
                                     std::uint64_t seed, bool restrict_starts = false);

SamplePath<double> efron_resample(const SamplePath<double>& path, std::size_t m,
                                  std::uint64_t seed);

/// Circular moving block bootstrap: ell uniform start positions, blocks of
/// length b with indices past the end wrapping to the front, concatenation
/// truncated to n values.
SamplePath<double> mbb_resample(const SamplePath<double>& path,
                                const BlockSchedule& schedule, std::uint64_t seed,
                                bool restrict_starts = false);

SamplePath<double> resample(const SamplePath<double>& path, const BootstrapScheme& scheme,
                            std::uint64_t seed);

/// One realization of the random measure L_{P*_n}(S_n): the empirical law of
/// the estimator over inner_reps independent resamples of `path`.
DiscreteMeasure<double> bootstrap_law_of_estimator(const SamplePath<double>& path,
                                                   const BootstrapScheme& scheme,
                                                   const EstimatorOperator& estimator,
                                                   std::size_t inner_reps,
                                                   std::uint64_t seed,
                                                   unsigned threads = 0);

}  // namespace robustboot
