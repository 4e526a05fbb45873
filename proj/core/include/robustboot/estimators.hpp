#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "robustboot/measure.hpp"

namespace robustboot {

/// Statistical operator S: M(R) -> R. Path evaluation factors through the
/// empirical measure, so permutation invariance holds by construction.
class EstimatorOperator {
 public:
  using Fn = std::function<double(const DiscreteMeasure<double>&)>;

  EstimatorOperator() = default;
  EstimatorOperator(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  static EstimatorOperator mean();
  static EstimatorOperator median();
  /// Mean of the measure conditioned between the trim and 1-trim quantiles,
  /// with fractional mass splitting at the boundary atoms.
  static EstimatorOperator trimmed_mean(double trim);
  /// Root of sum_i w_i psi_k(z_i - theta), psi_k the clipped identity;
  /// bisection to 1e-10, midpoint of the root interval when it is flat.
  static EstimatorOperator huber(double k);

  const std::string& name() const { return name_; }
  bool valid() const { return static_cast<bool>(fn_); }

  double evaluate(const DiscreteMeasure<double>& m) const;
  double evaluate(const SamplePath<double>& path) const {
    return evaluate(empirical_measure(path));
  }

 private:
  std::string name_;
  Fn fn_;
};

/// Builds an operator from a registry name plus numeric parameters
/// ("trim" for trimmed_mean, "k" for huber). Unknown names raise a
/// DomainError listing the registry keys.
EstimatorOperator make_estimator(const std::string& name,
                                 const std::map<std::string, double>& params = {});

std::vector<std::string> estimator_names();

/// Hook for external operators; registered factories become addressable by
/// name like the built-ins.
void register_estimator(
    const std::string& name,
    std::function<EstimatorOperator(const std::map<std::string, double>&)> factory);

struct ModulusRow {
  double radius = 0.0;
  double modulus = 0.0;
  std::size_t accepted = 0;
};

/// Empirical lower bound on the modulus of continuity of `op` at `center`:
/// the largest |S(Q) - S(center)| over randomly perturbed measures Q kept
/// when bl(Q, center) <= radius.
std::vector<ModulusRow> modulus_probe(const EstimatorOperator& op,
                                      const DiscreteMeasure<double>& center,
                                      const MetricSpace<double>& space,
                                      const std::vector<double>& radius_grid,
                                      std::size_t probes, std::uint64_t seed);

}  // namespace robustboot
