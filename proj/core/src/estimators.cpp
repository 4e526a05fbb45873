#include "robustboot/estimators.hpp"

#include <mutex>

#include "robustboot/bl.hpp"
#include "robustboot/rng.hpp"

namespace robustboot {

namespace {

double measure_mean(const DiscreteMeasure<double>& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) acc += m.weights()[i] * m.support()[i];
  return acc;
}

// Left-continuous quantile inverse with the midpoint rule at flat spots:
// when the cumulative weight hits 1/2 exactly, the quantile function is flat
// between two atoms and the median is their midpoint.
double measure_median(const DiscreteMeasure<double>& m) {
  const auto& xs = m.support();
  const auto& ws = m.weights();
  double cum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cum += ws[i];
    if (cum > 0.5 + 1e-12) return xs[i];
    if (std::fabs(cum - 0.5) <= 1e-12)
      return (i + 1 < xs.size()) ? 0.5 * (xs[i] + xs[i + 1]) : xs[i];
  }
  return xs.back();
}

double measure_trimmed_mean(const DiscreteMeasure<double>& m, double trim) {
  const auto& xs = m.support();
  const auto& ws = m.weights();
  const double lo = trim, hi = 1.0 - trim;
  double mass = 0.0, moment = 0.0, cum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double a = cum;
    cum += ws[i];
    double keep = std::min(cum, hi) - std::max(a, lo);
    if (keep > 0.0) {
      mass += keep;
      moment += keep * xs[i];
    }
  }
  if (mass <= 0.0) throw NumericError("trimmed_mean: no retained mass");
  return moment / mass;
}

double huber_score(const DiscreteMeasure<double>& m, double k, double theta) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double u = m.support()[i] - theta;
    acc += m.weights()[i] * std::clamp(u, -k, k);
  }
  return acc;
}

// The score is continuous and nonincreasing in theta with a sign change on
// the support hull. A flat zero stretch can occur when all residuals are
// clipped; the midpoint of the root interval keeps the operator single
// valued and symmetric.
double measure_huber(const DiscreteMeasure<double>& m, double k) {
  double lo = m.support().front();
  double hi = m.support().back();
  if (lo == hi) return lo;
  double flo = huber_score(m, k, lo);
  double fhi = huber_score(m, k, hi);
  if (flo < -1e-12 || fhi > 1e-12)
    throw NumericError("huber: no sign change on the support hull");

  auto bisect = [&](auto pred) {
    // invariant: pred(hi_) false, pred(lo_) true
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
      double mid = 0.5 * (a + b);
      if (pred(huber_score(m, k, mid)))
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  };
  double left_edge = bisect([](double s) { return s > 1e-13; });
  double right_edge = bisect([](double s) { return s >= -1e-13; });
  return 0.5 * (left_edge + right_edge);
}

using Factory = std::function<EstimatorOperator(const std::map<std::string, double>&)>;

std::map<std::string, Factory>& registry() {
  static std::map<std::string, Factory> reg = {
      {"mean", [](const auto&) { return EstimatorOperator::mean(); }},
      {"median", [](const auto&) { return EstimatorOperator::median(); }},
      {"trimmed_mean",
       [](const std::map<std::string, double>& p) {
         auto it = p.find("trim");
         return EstimatorOperator::trimmed_mean(it == p.end() ? 0.1 : it->second);
       }},
      {"huber",
       [](const std::map<std::string, double>& p) {
         auto it = p.find("k");
         return EstimatorOperator::huber(it == p.end() ? 1.345 : it->second);
       }},
  };
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double EstimatorOperator::evaluate(const DiscreteMeasure<double>& m) const {
  if (!fn_) throw DomainError("EstimatorOperator: empty operator");
  return fn_(m);
}

EstimatorOperator EstimatorOperator::mean() {
  return {"mean", measure_mean};
}

EstimatorOperator EstimatorOperator::median() {
  return {"median", measure_median};
}

EstimatorOperator EstimatorOperator::trimmed_mean(double trim) {
  if (trim < 0.0 || trim >= 0.5)
    throw DomainError("trimmed_mean: trim must be in [0, 0.5)");
  return {"trimmed_mean", [trim](const DiscreteMeasure<double>& m) {
            return measure_trimmed_mean(m, trim);
          }};
}

EstimatorOperator EstimatorOperator::huber(double k) {
  if (k <= 0.0) throw DomainError("huber: k must be positive");
  return {"huber", [k](const DiscreteMeasure<double>& m) { return measure_huber(m, k); }};
}

EstimatorOperator make_estimator(const std::string& name,
                                 const std::map<std::string, double>& params) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::string known;
    for (const auto& [key, _] : registry()) {
      if (!known.empty()) known += ", ";
      known += key;
    }
    throw DomainError("unknown estimator '" + name + "' (registry: " + known + ")");
  }
  return it->second(params);
}

std::vector<std::string> estimator_names() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [key, _] : registry()) names.push_back(key);
  return names;
}

void register_estimator(const std::string& name, Factory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::vector<ModulusRow> modulus_probe(const EstimatorOperator& op,
                                      const DiscreteMeasure<double>& center,
                                      const MetricSpace<double>& space,
                                      const std::vector<double>& radius_grid,
                                      std::size_t probes, std::uint64_t seed) {
  for (double r : radius_grid)
    if (r < 0.0) throw DomainError("modulus_probe: negative radius");
  const double s_center = op.evaluate(center);
  const double hull_lo = center.support().front();
  const double hull_hi = center.support().back();

  std::vector<ModulusRow> table;
  table.reserve(radius_grid.size());
  for (std::size_t ri = 0; ri < radius_grid.size(); ++ri) {
    const double radius = radius_grid[ri];
    ModulusRow row;
    row.radius = radius;
    if (radius == 0.0) {
      row.accepted = probes;
      table.push_back(row);
      continue;
    }
    Rng rng = Rng(seed).substream(ri);
    std::size_t accepted = 0;
    std::size_t attempts = 0;
    const std::size_t max_attempts = probes * 40 + 200;
    while (accepted < probes && attempts < max_attempts) {
      ++attempts;
      std::vector<double> xs = center.support();
      std::vector<double> ws = center.weights();
      // Position jitter plus weight tilt, both on the radius scale.
      for (double& x : xs) {
        x += rng.uniform(-radius, radius);
        x = std::clamp(x, hull_lo - radius, hull_hi + radius);
        if (space.contains && !space.contains(x)) x = std::clamp(x, hull_lo, hull_hi);
      }
      double total = 0.0;
      for (double& w : ws) {
        w = std::max(0.0, w * (1.0 + rng.uniform(-1.0, 1.0) * std::min(1.0, 2.0 * radius)));
        total += w;
      }
      if (total <= 0.0) continue;
      for (double& w : ws) w /= total;
      DiscreteMeasure<double> q(std::move(xs), std::move(ws));
      if (bl_value(q, center, space) > radius) continue;
      ++accepted;
      row.modulus = std::max(row.modulus, std::fabs(op.evaluate(q) - s_center));
    }
    row.accepted = accepted;
    table.push_back(row);
  }
  return table;
}

}  // namespace robustboot
