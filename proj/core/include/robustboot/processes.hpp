#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustboot/measure.hpp"
#include "robustboot/rng.hpp"

namespace robustboot {

/// Substream tags: every consumer of randomness derives its own key from the
/// master seed through these ids, so outer paths, inner resamples and
/// contamination never share a stream.
namespace streams {
inline constexpr std::uint64_t kBasePath = 0x01;
inline constexpr std::uint64_t kContamination = 0x02;
inline constexpr std::uint64_t kResample = 0x03;
inline constexpr std::uint64_t kOuterPath = 0x04;
inline constexpr std::uint64_t kInnerBoot = 0x05;
inline constexpr std::uint64_t kProbe = 0x06;
inline constexpr std::uint64_t kErrorBar = 0x07;
inline constexpr std::uint64_t kDiagnostic = 0x08;
}  // namespace streams

/// One-dimensional sampling distribution used inside process kinds.
struct Distribution1D {
  enum class Kind { kUniform, kDiscrete, kPoint };
  Kind kind = Kind::kUniform;
  double lo = 0.0, hi = 1.0;             // kUniform
  DiscreteMeasure<double> atoms;          // kDiscrete
  double point = 0.0;                     // kPoint

  static Distribution1D uniform(double lo, double hi);
  static Distribution1D discrete(DiscreteMeasure<double> m);
  static Distribution1D point_mass(double x);

  double sample(Rng& rng) const;
  /// Exact for discrete/point kinds; a grid discretization otherwise.
  DiscreteMeasure<double> as_measure(std::size_t resolution) const;
  bool exact() const { return kind != Kind::kUniform; }
  void validate(double ground_lo, double ground_hi) const;
};

struct ContaminationSpec {
  enum class Mode { kGrossError, kRounding, kDistributionShift };
  Mode mode = Mode::kGrossError;
  double fraction = 0.0;   // gross_error / distribution_shift
  double magnitude = 0.0;  // rounding half-width
  /// Replacement law; defaults to the point mass at the upper end of the
  /// ground interval.
  std::optional<Distribution1D> shift_target;
  void validate() const;
};

struct GroundInterval {
  double lo = 0.0;
  double hi = 1.0;
  MetricSpace<double> space() const { return interval_space(lo, hi); }
};

struct MarkovChainParams {
  std::vector<std::vector<double>> transition;  // rows sum to one
  std::vector<double> emissions;                // value emitted per state
};

/// Declarative description of a data generating process. All kinds emit real
/// values inside `ground`; generation is a pure function of (spec, n, seed).
struct ProcessSpec {
  enum class Kind {
    kIid,
    kNormalDrift,             // Z_i ~ N(a_i, 1), affinely clipped into ground
    kShrinkingContamination,  // P^i = (1 - eps_i) base + eps_i contaminant
    kMarkovChain,             // finite chain started from its stationary law
    kAr1Transformed,          // AR(1) pushed through the normal CDF
  };
  enum class RateTag { kOneOverI, kOneOverSqrtI };

  Kind kind = Kind::kIid;
  GroundInterval ground;

  Distribution1D iid;  // kIid

  // kNormalDrift: a_i = drift_limit + drift_amplitude * rate(i), so
  // |a_i| <= |drift_limit| + |drift_amplitude| and a_i -> drift_limit.
  double drift_limit = 0.0;
  double drift_amplitude = 1.0;
  RateTag drift_rate = RateTag::kOneOverI;
  /// Raw draws x are mapped by clamp((x + c) / (2c), 0, 1) scaled into the
  /// ground interval; c is this half-width.
  double clip_half_width = 4.0;

  // kShrinkingContamination: eps_i = min(1, eps0 * rate(i))
  Distribution1D base;
  Distribution1D contaminant;
  double eps0 = 1.0;
  RateTag eps_rate = RateTag::kOneOverI;

  MarkovChainParams chain;  // kMarkovChain

  double phi = 0.5;  // kAr1Transformed, |phi| < 1

  std::optional<ContaminationSpec> contamination;

  std::string name() const;
  void validate() const;
};

double rate_value(ProcessSpec::RateTag tag, std::size_t i);

/// Stationary distribution of a row-stochastic matrix (direct solve).
std::vector<double> stationary_distribution(
    const std::vector<std::vector<double>>& transition);

SamplePath<double> generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed);

SamplePath<double> contaminate(const SamplePath<double>& path,
                               const ContaminationSpec& spec,
                               const GroundInterval& ground, std::uint64_t seed);

struct MarginalLaw {
  DiscreteMeasure<double> measure;
  bool exact = false;
  std::size_t resolution = 0;
};

/// Law of Z_i under the spec (1-based index), contamination included.
MarginalLaw marginal_law(const ProcessSpec& spec, std::size_t i, std::size_t n,
                         std::size_t resolution);

/// Mixture (1/n) sum_i law(Z_i).
MarginalLaw mixture_marginal_law(const ProcessSpec& spec, std::size_t n,
                                 std::size_t resolution);

/// The declared limit of the empirical measures (the Varadarajan target).
MarginalLaw limit_law(const ProcessSpec& spec, std::size_t resolution);

struct VaradarajanRow {
  std::size_t n = 0;
  double median_bl = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct VaradarajanTable {
  std::vector<VaradarajanRow> rows;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::size_t compress_atoms = 0;
};

/// Empirical convergence record for the (strong) Varadarajan property: the
/// median over reps of bl(empirical measure at n, target), per n. Empirical
/// supports are quantile-compressed to `compress_atoms` before the solve and
/// the resolution is recorded in the table.
VaradarajanTable varadarajan_diagnostic(const ProcessSpec& spec,
                                        const DiscreteMeasure<double>& target,
                                        const std::vector<std::size_t>& n_grid,
                                        std::size_t reps, std::uint64_t seed,
                                        std::size_t compress_atoms = 512,
                                        unsigned threads = 0);

}  // namespace robustboot
