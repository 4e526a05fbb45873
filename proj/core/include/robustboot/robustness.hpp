#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robustboot/bl.hpp"
#include "robustboot/bootstrap.hpp"
#include "robustboot/processes.hpp"

namespace robustboot {

/// Distribution over M(H) of the bootstrap approximations: outer_reps
/// independent inner laws, each compressed by quantile binning.
using LawOfLaws = DiscreteMeasure<DiscreteMeasure<double>>;

struct ExperimentConfig {
  ProcessSpec process_p;
  ProcessSpec process_q;
  BootstrapScheme scheme;
  std::string estimator_name = "mean";
  std::map<std::string, double> estimator_params;
  std::vector<std::size_t> n_grid;
  std::size_t outer_reps = 32;
  std::size_t inner_reps = 500;
  std::uint64_t seed = 0;
  enum class Method { kNested, kCoupled, kBoth };
  Method method = Method::kBoth;
  std::size_t bin_max_atoms = 200;    // inner-law compression before LP solves
  std::size_t max_outer_for_lp = 64;  // cap on outer atoms per arm
  std::size_t proxy_resolution = 512;
  std::size_t error_bar_resamples = 30;
  unsigned threads = 0;

  void validate() const;
};

/// Per-arm realizations for one n: the k-th entries of both arms share all
/// random streams, so identical specs give identical laws entry by entry.
struct CoupledLaws {
  std::vector<DiscreteMeasure<double>> p_laws;
  std::vector<DiscreteMeasure<double>> q_laws;
};

CoupledLaws coupled_laws(const ProcessSpec& p, const ProcessSpec& q,
                         const BootstrapScheme& scheme, const EstimatorOperator& estimator,
                         std::size_t n, std::size_t outer_reps, std::size_t inner_reps,
                         std::uint64_t seed, std::size_t bin_max_atoms, unsigned threads);

LawOfLaws law_of_laws(const ProcessSpec& spec, const BootstrapScheme& scheme,
                      const EstimatorOperator& estimator, std::size_t n,
                      std::size_t outer_reps, std::size_t inner_reps, std::uint64_t seed,
                      std::size_t bin_max_atoms = 200, unsigned threads = 0);

/// Nested distance with its reusable pieces: the union of outer atoms, the
/// matrix of inner BL distances (the ground metric of the outer LP), and the
/// arm weight vectors. Error bars resample outer atoms against this matrix
/// without new inner solves.
struct NestedDistance {
  double value = 0.0;
  std::vector<double> p_weights;  // per union atom
  std::vector<double> q_weights;
  std::vector<std::vector<double>> dist;  // union x union inner BL distances
  long lp_iterations = 0;
};

NestedDistance nested_bl_full(const LawOfLaws& lp, const LawOfLaws& lq,
                              const MetricSpace<double>& h_space,
                              std::size_t max_outer = 64, unsigned threads = 0);

double nested_bl_distance(const LawOfLaws& lp, const LawOfLaws& lq,
                          const MetricSpace<double>& h_space,
                          std::size_t max_outer = 64, unsigned threads = 0);

struct CoupledExpectation {
  double value = 0.0;
  std::vector<double> per_rep;
};

/// Mean over shared-stream replicate pairs of bl(inner law P, inner law Q);
/// an upper bound for the nested distance built from the same replicates.
CoupledExpectation coupled_expectation(const CoupledLaws& laws,
                                       const MetricSpace<double>& h_space,
                                       unsigned threads = 0);

struct InputProxy {
  double value = 0.0;
  bool exact = false;
  std::size_t resolution = 0;
};

/// bl between the mixture marginals (1/n) sum P^i and (1/n) sum Q^i: the
/// computable lower proxy for the joint input distance.
InputProxy input_distance_proxy(const ProcessSpec& p, const ProcessSpec& q, std::size_t n,
                                std::size_t resolution = 512);

struct RobustnessRow {
  std::size_t n = 0;
  double input_proxy = 0.0;
  bool proxy_exact = false;
  std::size_t proxy_resolution = 0;
  std::optional<double> nested;
  std::optional<double> coupled;
  std::optional<double> err_nested;
  std::optional<double> err_coupled;
  double runtime_ms = 0.0;
  std::string status = "ok";
};

struct RobustnessReport {
  std::vector<RobustnessRow> rows;
  ExperimentConfig config;
  std::string version;
};

/// Runs the full experiment over the n grid. Per-n failures are recorded in
/// the row status; the report is emitted regardless.
RobustnessReport run_experiment(const ExperimentConfig& config);

}  // namespace robustboot
