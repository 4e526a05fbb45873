#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robustboot/errors.hpp"

namespace robustboot {

/// Two support points closer than this are the same atom.
inline constexpr double kAtomTol = 1e-12;

template <class T>
class DiscreteMeasure;

// Ordering is exact (strict weak); identity is tolerance-based and applied
// only between sort-adjacent elements when measures are canonicalized.
inline bool element_less(double a, double b) { return a < b; }
inline bool element_equal(double a, double b) { return std::fabs(a - b) < kAtomTol; }

template <class T>
bool element_less(const std::vector<T>& a, const std::vector<T>& b);
template <class T>
bool element_equal(const std::vector<T>& a, const std::vector<T>& b);
template <class T>
bool element_less(const DiscreteMeasure<T>& a, const DiscreteMeasure<T>& b);
template <class T>
bool element_equal(const DiscreteMeasure<T>& a, const DiscreteMeasure<T>& b);

/// A ground set with a metric. Instances: intervals and boxes in up to three
/// dimensions, n-fold product spaces, and spaces of discrete measures under
/// the bounded Lipschitz distance.
template <class T>
struct MetricSpace {
  std::function<double(const T&, const T&)> dist;
  std::optional<double> diameter_bound;

  /// Set when dist(a,b) == |coordinate(a) - coordinate(b)|; unlocks the
  /// one-dimensional fast path of bl_distance.
  std::function<double(const T&)> coordinate;

  /// Optional membership test used for input validation.
  std::function<bool(const T&)> contains;

  bool line_like() const { return static_cast<bool>(coordinate); }
};

/// Finitely supported probability measure in canonical form: support sorted,
/// sort-adjacent atoms within kAtomTol merged, weights renormalized to sum
/// exactly to one.
template <class T>
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  DiscreteMeasure(std::vector<T> support, std::vector<double> weights)
      : support_(std::move(support)), weights_(std::move(weights)) {
    canonicalize();
  }

  static DiscreteMeasure dirac(T point) {
    return DiscreteMeasure({std::move(point)}, {1.0});
  }

  static DiscreteMeasure uniform_on(std::vector<T> support) {
    std::vector<double> w(support.size(), support.empty() ? 0.0 : 1.0 / static_cast<double>(support.size()));
    return DiscreteMeasure(std::move(support), std::move(w));
  }

  const std::vector<T>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return support_.size(); }
  bool empty() const { return support_.empty(); }

  bool operator==(const DiscreteMeasure& other) const {
    if (support_.size() != other.support_.size()) return false;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (!element_equal(support_[i], other.support_[i])) return false;
      if (std::fabs(weights_[i] - other.weights_[i]) > kAtomTol) return false;
    }
    return true;
  }
  bool operator!=(const DiscreteMeasure& other) const { return !(*this == other); }

 private:
  std::vector<T> support_;
  std::vector<double> weights_;

  void canonicalize() {
    if (support_.size() != weights_.size())
      throw DomainError("DiscreteMeasure: support/weight length mismatch");
    if (support_.empty()) throw DomainError("DiscreteMeasure: empty support");
    double sum = 0.0;
    for (double& w : weights_) {
      if (w < 0.0) {
        if (w < -1e-12) throw DomainError("DiscreteMeasure: negative weight");
        w = 0.0;
      }
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw DomainError("DiscreteMeasure: weights sum to " + std::to_string(sum));

    std::vector<std::size_t> order(support_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return element_less(support_[a], support_[b]);
    });

    std::vector<T> merged_support;
    std::vector<double> merged_weights;
    merged_support.reserve(support_.size());
    merged_weights.reserve(support_.size());
    for (std::size_t idx : order) {
      if (!merged_support.empty() && element_equal(merged_support.back(), support_[idx])) {
        merged_weights.back() += weights_[idx];
      } else {
        merged_support.push_back(std::move(support_[idx]));
        merged_weights.push_back(weights_[idx]);
      }
    }
    // Drop exact-zero atoms unless that would empty the measure.
    std::vector<T> support;
    std::vector<double> weights;
    for (std::size_t i = 0; i < merged_support.size(); ++i) {
      if (merged_weights[i] > 0.0) {
        support.push_back(std::move(merged_support[i]));
        weights.push_back(merged_weights[i]);
      }
    }
    if (support.empty()) {
      support.push_back(std::move(merged_support.front()));
      weights.push_back(1.0);
    }
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
    support_ = std::move(support);
    weights_ = std::move(weights);
  }
};

template <class T>
bool element_less(const std::vector<T>& a, const std::vector<T>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [](const T& x, const T& y) { return element_less(x, y); });
}

template <class T>
bool element_equal(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!element_equal(a[i], b[i])) return false;
  return true;
}

template <class T>
bool element_less(const DiscreteMeasure<T>& a, const DiscreteMeasure<T>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (element_less(a.support()[i], b.support()[i])) return true;
    if (element_less(b.support()[i], a.support()[i])) return false;
    if (a.weights()[i] < b.weights()[i]) return true;
    if (b.weights()[i] < a.weights()[i]) return false;
  }
  return a.size() < b.size();
}

template <class T>
bool element_equal(const DiscreteMeasure<T>& a, const DiscreteMeasure<T>& b) {
  return a == b;
}

/// Ordered observations from one generator run.
template <class T>
struct SamplePath {
  std::vector<T> values;
  std::string origin;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
};

template <class T>
DiscreteMeasure<T> empirical_measure(const SamplePath<T>& path) {
  if (path.values.empty()) throw DomainError("empirical_measure: empty path");
  const double w = 1.0 / static_cast<double>(path.values.size());
  return DiscreteMeasure<T>(path.values, std::vector<double>(path.values.size(), w));
}

template <class T>
DiscreteMeasure<T> empirical_measure(const std::vector<T>& values) {
  SamplePath<T> p;
  p.values = values;
  return empirical_measure(p);
}

template <class T>
DiscreteMeasure<T> mixture(const std::vector<DiscreteMeasure<T>>& parts,
                           const std::vector<double>& coeffs) {
  if (parts.empty() || parts.size() != coeffs.size())
    throw DomainError("mixture: parts/coeffs length mismatch or empty");
  double sum = 0.0;
  for (double c : coeffs) {
    if (c < -1e-12) throw DomainError("mixture: negative coefficient");
    sum += c;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw DomainError("mixture: coefficients sum to " + std::to_string(sum));
  std::vector<T> support;
  std::vector<double> weights;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = 0; j < parts[i].size(); ++j) {
      support.push_back(parts[i].support()[j]);
      weights.push_back(coeffs[i] * parts[i].weights()[j]);
    }
  }
  return DiscreteMeasure<T>(std::move(support), std::move(weights));
}

/// Independent product of marginals. Guarded against the s^n blowup: at most
/// four factors, each with at most max_marginal_support atoms.
template <class T>
DiscreteMeasure<std::vector<T>> product_measure(
    const std::vector<DiscreteMeasure<T>>& marginals,
    std::size_t max_marginal_support = 6) {
  if (marginals.empty()) throw DomainError("product_measure: no marginals");
  if (marginals.size() > 4)
    throw CapacityError("product_measure: more than 4 factors");
  std::size_t total = 1;
  for (const auto& m : marginals) {
    if (m.size() > max_marginal_support)
      throw CapacityError("product_measure: marginal support exceeds " +
                          std::to_string(max_marginal_support));
    total *= m.size();
  }
  std::vector<std::vector<T>> support;
  std::vector<double> weights;
  support.reserve(total);
  weights.reserve(total);
  std::vector<std::size_t> idx(marginals.size(), 0);
  for (;;) {
    std::vector<T> tuple;
    tuple.reserve(marginals.size());
    double w = 1.0;
    for (std::size_t d = 0; d < marginals.size(); ++d) {
      tuple.push_back(marginals[d].support()[idx[d]]);
      w *= marginals[d].weights()[idx[d]];
    }
    support.push_back(std::move(tuple));
    weights.push_back(w);
    std::size_t d = marginals.size();
    while (d > 0) {
      --d;
      if (++idx[d] < marginals[d].size()) break;
      idx[d] = 0;
      if (d == 0) {
        return DiscreteMeasure<std::vector<T>>(std::move(support), std::move(weights));
      }
    }
  }
}

/// Sample-tuple metric: the smallest eps such that at most an eps-fraction of
/// coordinates are at ground distance eps or more. The infimum is attained in
/// the closure and equals the smallest feasible candidate from
/// {0} u {d_i} u {k/n}, where feasibility at c reads #{d_i > c} <= n*c.
template <class T>
double dn_distance(const std::vector<T>& a, const std::vector<T>& b,
                   const MetricSpace<T>& ground) {
  if (a.size() != b.size()) throw DomainError("dn_distance: length mismatch");
  if (a.empty()) throw DomainError("dn_distance: empty tuples");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = ground.dist(a[i], b[i]);

  std::vector<double> candidates;
  candidates.reserve(2 * n + 2);
  candidates.push_back(0.0);
  for (double v : d) candidates.push_back(v);
  for (std::size_t k = 0; k <= n; ++k)
    candidates.push_back(static_cast<double>(k) / static_cast<double>(n));
  std::sort(candidates.begin(), candidates.end());

  for (double c : candidates) {
    std::size_t count = 0;
    for (double v : d)
      if (v > c) ++count;
    if (static_cast<double>(count) <= static_cast<double>(n) * c + 1e-9) return c;
  }
  return 1.0;  // unreachable: c = 1 is always feasible
}

inline MetricSpace<double> interval_space(double lo, double hi) {
  if (!(lo < hi)) throw DomainError("interval_space: lo must be < hi");
  MetricSpace<double> s;
  s.dist = [](double a, double b) { return std::fabs(a - b); };
  s.diameter_bound = hi - lo;
  s.coordinate = [](double x) { return x; };
  s.contains = [lo, hi](double x) { return x >= lo - kAtomTol && x <= hi + kAtomTol; };
  return s;
}

inline MetricSpace<double> real_line() {
  MetricSpace<double> s;
  s.dist = [](double a, double b) { return std::fabs(a - b); };
  s.coordinate = [](double x) { return x; };
  return s;
}

/// Euclidean box in up to three dimensions.
inline MetricSpace<std::vector<double>> box_space(
    std::vector<std::pair<double, double>> bounds) {
  if (bounds.empty() || bounds.size() > 3)
    throw DomainError("box_space: dimension must be 1..3");
  double diam_sq = 0.0;
  for (auto& [lo, hi] : bounds) {
    if (!(lo < hi)) throw DomainError("box_space: lo must be < hi");
    diam_sq += (hi - lo) * (hi - lo);
  }
  MetricSpace<std::vector<double>> s;
  s.dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
  };
  s.diameter_bound = std::sqrt(diam_sq);
  s.contains = [bounds](const std::vector<double>& x) {
    if (x.size() != bounds.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < bounds[i].first - kAtomTol || x[i] > bounds[i].second + kAtomTol) return false;
    return true;
  };
  if (bounds.size() == 1) s.coordinate = [](const std::vector<double>& x) { return x[0]; };
  return s;
}

/// n-fold product of `ground` under the d_n metric. d_n is capped by one, so
/// the diameter bound is min(1, ground diameter).
template <class T>
MetricSpace<std::vector<T>> product_space_dn(MetricSpace<T> ground, std::size_t n) {
  if (n < 1) throw DomainError("product_space_dn: n must be >= 1");
  MetricSpace<std::vector<T>> s;
  s.dist = [ground](const std::vector<T>& a, const std::vector<T>& b) {
    return dn_distance(a, b, ground);
  };
  double diam = 1.0;
  if (ground.diameter_bound) diam = std::min(1.0, *ground.diameter_bound);
  s.diameter_bound = diam;
  return s;
}

/// n-fold product of `ground` under the 1-product (sum) metric.
template <class T>
MetricSpace<std::vector<T>> product_space_sum(MetricSpace<T> ground, std::size_t n) {
  if (n < 1) throw DomainError("product_space_sum: n must be >= 1");
  MetricSpace<std::vector<T>> s;
  s.dist = [ground](const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) throw DomainError("product metric: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += ground.dist(a[i], b[i]);
    return acc;
  };
  if (ground.diameter_bound) s.diameter_bound = static_cast<double>(n) * *ground.diameter_bound;
  return s;
}

/// Weighted quantile binning down to at most max_atoms atoms. Each bin is
/// replaced by its weighted mean, so total mass and the overall mean are
/// preserved and the bounded Lipschitz perturbation is at most the largest
/// within-bin spread.
DiscreteMeasure<double> compress_measure(const DiscreteMeasure<double>& m,
                                         std::size_t max_atoms);

}  // namespace robustboot
