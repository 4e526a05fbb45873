#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "robustboot/processes.hpp"

namespace robustboot {

/// Exact alpha(sigma(Z_1), sigma(Z_{1+lag})) for a stationary finite chain:
/// enumeration of all event pairs under the stationary joint law. State
/// space limited to three states (the enumeration is 2^s x 2^s).
double exact_alpha_markov(const std::vector<std::vector<double>>& transition,
                          std::size_t lag);

/// (1/n^2) sum over ordered pairs i != j of alpha(|i - j|). The i == j terms
/// are dropped: they equal max_A pi(A)(1 - pi(A)) regardless of dependence,
/// so excluding them makes the diagnostic read zero for independent chains
/// without changing the limit.
double weak_bi_mixing_average(const ProcessSpec& spec, std::size_t n);

struct MixingDiagnostics {
  std::vector<double> alpha_coeffs;      // lags 1..m_max
  std::vector<std::size_t> n_grid;
  std::vector<double> weak_bi_averages;  // aligned with n_grid
  std::vector<double> tail_sums;         // T(n) = sum_{m>n}^{m_max} alpha(m)
  /// Least-squares fit of log T(n) = log C - gamma log n over the first half
  /// of the tail; gamma_hat > 0 indicates the summability condition holds.
  double gamma_hat = 0.0;
  double log_c = 0.0;
  /// Partial sums sum_{m=0}^{m_max} (m+1)^{8d+7} alpha(m)^{1/2} for d=1..3,
  /// using the pairwise coefficients (a lower bound for the past/future
  /// sigma-algebra version).
  std::vector<double> dimension_condition_partials;
  /// Geometric decay rate: exact |1-p-q| for two-state chains, the |phi|
  /// bound for AR(1) (metadata only, no exact alpha for continuous chains).
  std::optional<double> geometric_rate;
};

MixingDiagnostics mixing_diagnostics(const ProcessSpec& spec, std::size_t m_max,
                                     const std::vector<std::size_t>& n_grid);

}  // namespace robustboot
