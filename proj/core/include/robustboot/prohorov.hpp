#pragma once

#include <optional>
#include <vector>

#include "robustboot/bl.hpp"
#include "robustboot/measure.hpp"

namespace robustboot {

struct ProhorovResult {
  double epsilon = 0.0;
  /// Indices into p's support with P(A) > Q(A^e) + e at e slightly below
  /// epsilon; computed on request, absent when epsilon is already ~0.
  std::optional<std::vector<std::size_t>> witness_set;
  double witness_epsilon = 0.0;
};

struct ProhorovOptions {
  std::size_t max_union_support = 2000;
  double tolerance = 1e-9;
  bool want_witness = false;
};

namespace detail {

ProhorovResult prohorov_core(const std::vector<double>& pw,
                             const std::vector<double>& qw,
                             const std::vector<std::vector<double>>& dist,
                             const ProhorovOptions& opt);

}  // namespace detail

/// Smallest eps (within tolerance) with P(A) <= Q(A^eps) + eps for all A,
/// located by binary search with a max-flow coupling test at each eps.
template <class T>
ProhorovResult prohorov(const DiscreteMeasure<T>& p, const DiscreteMeasure<T>& q,
                        const MetricSpace<T>& space, const ProhorovOptions& opt = {}) {
  if (p.size() + q.size() > 2 * opt.max_union_support)
    throw CapacityError("prohorov: support too large");
  if (p == q) return {};
  std::vector<std::vector<double>> dist(p.size(), std::vector<double>(q.size()));
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      dist[i][j] = space.dist(p.support()[i], q.support()[j]);
  return detail::prohorov_core(p.weights(), q.weights(), dist, opt);
}

template <class T>
double prohorov_distance(const DiscreteMeasure<T>& p, const DiscreteMeasure<T>& q,
                         const MetricSpace<T>& space, const ProhorovOptions& opt = {}) {
  return prohorov(p, q, space, opt).epsilon;
}

/// Joint report of both metrics plus the equivalence inequalities used by
/// the theory: d_BL <= 2 pi (checked always) and pi <= sqrt(d_BL) (asserted
/// only in the small-distance regime d_BL <= 0.25; recorded otherwise).
struct MetricRelationReport {
  double bl = 0.0;
  double prohorov = 0.0;
  double sqrt_bl = 0.0;
  bool bl_le_two_prohorov = false;
  bool pi_le_sqrt_bl = false;
  bool pi_le_sqrt_bl_asserted = false;
  static constexpr double kAssertRegime = 0.25;
  static constexpr double kTol = 1e-6;
};

template <class T>
MetricRelationReport metric_relations(const DiscreteMeasure<T>& p,
                                      const DiscreteMeasure<T>& q,
                                      const MetricSpace<T>& space) {
  MetricRelationReport r;
  r.bl = bl_value(p, q, space);
  r.prohorov = prohorov_distance(p, q, space);
  r.sqrt_bl = std::sqrt(std::max(0.0, r.bl));
  r.bl_le_two_prohorov = r.bl <= 2.0 * r.prohorov + MetricRelationReport::kTol;
  r.pi_le_sqrt_bl = r.prohorov <= r.sqrt_bl + MetricRelationReport::kTol;
  r.pi_le_sqrt_bl_asserted = r.bl <= MetricRelationReport::kAssertRegime;
  return r;
}

}  // namespace robustboot
