#include "robustboot/bootstrap.hpp"

#include <cmath>

#include "robustboot/parallel.hpp"
#include "robustboot/processes.hpp"
#include "robustboot/rng.hpp"

namespace robustboot {

BlockSchedule block_schedule(std::size_t n, double block_exponent) {
  if (n < 1) throw DomainError("block_schedule: n must be >= 1");
  if (!(block_exponent > 0.0 && block_exponent <= 0.45))
    throw DomainError("block_schedule: exponent must be in (0, 0.45]");
  std::size_t q = 0;
  while ((std::size_t{1} << (q + 1)) <= n) ++q;
  double raw = std::exp2(static_cast<double>(q) * block_exponent);
  std::size_t b = static_cast<std::size_t>(std::floor(raw + 1e-9));
  if (b < 1) b = 1;
  if (b > n) b = n;
  BlockSchedule sched;
  sched.n = n;
  sched.b = b;
  sched.ell = (n + b - 1) / b;
  return sched;
}

std::vector<std::size_t> efron_indices(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw DomainError("efron_indices: n and m must be >= 1");
  Rng rng(seed);
  std::vector<std::size_t> idx(m);
  for (std::size_t r = 0; r < m; ++r) idx[r] = static_cast<std::size_t>(rng.below(n));
  return idx;
}

std::vector<std::size_t> mbb_indices(std::size_t n, const BlockSchedule& schedule,
                                     std::uint64_t seed, bool restrict_starts) {
  if (schedule.n != n) throw DomainError("mbb_indices: schedule was built for another n");
  Rng rng(seed);
  const std::size_t b = schedule.b;
  const std::size_t start_range = restrict_starts ? (n - std::min(b, n) + 1) : n;
  std::vector<std::size_t> idx;
  idx.reserve(schedule.ell * b);
  for (std::size_t block = 0; block < schedule.ell && idx.size() < n; ++block) {
    std::size_t start = static_cast<std::size_t>(rng.below(start_range));
    for (std::size_t t = 0; t < b && idx.size() < n; ++t)
      idx.push_back((start + t) % n);
  }
  return idx;
}

namespace {

SamplePath<double> gather(const SamplePath<double>& path,
                          const std::vector<std::size_t>& idx, const char* origin_tag) {
  SamplePath<double> out;
  out.values.reserve(idx.size());
  for (std::size_t i : idx) out.values.push_back(path.values[i]);
  out.origin = path.origin + origin_tag;
  out.seed = path.seed;
  return out;
}

}  // namespace

SamplePath<double> efron_resample(const SamplePath<double>& path, std::size_t m,
                                  std::uint64_t seed) {
  return gather(path, efron_indices(path.values.size(), m, seed), "|efron");
}

SamplePath<double> mbb_resample(const SamplePath<double>& path,
                                const BlockSchedule& schedule, std::uint64_t seed,
                                bool restrict_starts) {
  return gather(path, mbb_indices(path.values.size(), schedule, seed, restrict_starts),
                "|mbb");
}

SamplePath<double> resample(const SamplePath<double>& path, const BootstrapScheme& scheme,
                            std::uint64_t seed) {
  const std::size_t n = path.values.size();
  if (scheme.kind == BootstrapScheme::Kind::kEfron) {
    return efron_resample(path, scheme.resample_size.value_or(n), seed);
  }
  return mbb_resample(path, block_schedule(n, scheme.block_exponent), seed,
                      scheme.restrict_starts);
}

DiscreteMeasure<double> bootstrap_law_of_estimator(const SamplePath<double>& path,
                                                   const BootstrapScheme& scheme,
                                                   const EstimatorOperator& estimator,
                                                   std::size_t inner_reps,
                                                   std::uint64_t seed, unsigned threads) {
  if (inner_reps < 1) throw DomainError("bootstrap_law_of_estimator: inner_reps >= 1");
  std::vector<double> values(inner_reps, 0.0);
  std::uint64_t base = Rng::derive(seed, streams::kResample);
  parallel_for(
      inner_reps,
      [&](std::size_t r) {
        SamplePath<double> star = resample(path, scheme, Rng::derive(base, r));
        try {
          values[r] = estimator.evaluate(star);
        } catch (const std::exception& e) {
          throw NumericError("estimator failed at resample " + std::to_string(r) + ": " +
                             e.what());
        }
      },
      threads);
  const double w = 1.0 / static_cast<double>(inner_reps);
  return DiscreteMeasure<double>(std::move(values),
                                 std::vector<double>(inner_reps, w));
}

}  // namespace robustboot
