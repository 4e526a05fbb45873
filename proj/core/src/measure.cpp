#include "robustboot/measure.hpp"

namespace robustboot {

DiscreteMeasure<double> compress_measure(const DiscreteMeasure<double>& m,
                                         std::size_t max_atoms) {
  if (max_atoms < 1) throw DomainError("compress_measure: max_atoms must be >= 1");
  if (m.size() <= max_atoms) return m;
  const auto& xs = m.support();
  const auto& ws = m.weights();
  const double target = 1.0 / static_cast<double>(max_atoms);

  std::vector<double> support;
  std::vector<double> weights;
  support.reserve(max_atoms);
  weights.reserve(max_atoms);
  double bin_mass = 0.0;
  double bin_moment = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bin_mass += ws[i];
    bin_moment += ws[i] * xs[i];
    // Close the bin once it reaches the target mass; the last atom always
    // closes the final bin.
    if (bin_mass >= target - 1e-15 || i + 1 == xs.size()) {
      if (bin_mass > 0.0) {
        support.push_back(bin_moment / bin_mass);
        weights.push_back(bin_mass);
      }
      bin_mass = 0.0;
      bin_moment = 0.0;
    }
  }
  return DiscreteMeasure<double>(std::move(support), std::move(weights));
}

}  // namespace robustboot
