#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "robustboot/measure.hpp"

namespace robustboot {

/// Optimal test function for the BL program: maximize sum (p_i - q_i) f_i
/// subject to |f_i| <= M, |f_i - f_j| <= L d_ij, L + M <= 1.
struct BlCertificate {
  std::vector<double> function_values;  // one per union-support atom
  double lipschitz_part = 0.0;          // L
  double sup_part = 0.0;                // M
  double objective = 0.0;
};

/// Flow-side witness from the simplex route: a decomposition of p - q into
/// transported mass plus created/destroyed mass whose cost equals the primal
/// objective. Matching feasible pair = optimality by weak duality.
struct BlDualCertificate {
  struct Arc {
    std::size_t from = 0;
    std::size_t to = 0;
    double flow = 0.0;
    double dist = 0.0;
  };
  std::vector<Arc> transport;
  std::vector<double> created;    // per union atom
  std::vector<double> destroyed;  // per union atom
  double objective = 0.0;
};

enum class BlMethod {
  kAuto,     // simplex for small unions, parametric chain on 1-D lines
  kSimplex,  // force the LP route
  kChain,    // force the 1-D parametric route (line-like spaces only)
};

struct BlOptions {
  BlMethod method = BlMethod::kAuto;
  std::size_t max_union_support = 2000;
  long max_iterations = 2000000;
  bool want_certificate = true;
  std::string dump_path;  // when nonempty, write the instance + solution here
};

struct BlSolution {
  double value = 0.0;
  BlCertificate certificate;
  std::optional<BlDualCertificate> dual;
  long iterations = 0;
  BlMethod method_used = BlMethod::kSimplex;
};

template <class T>
struct UnionSupport {
  std::vector<T> atoms;
  std::vector<double> p_weights;
  std::vector<double> q_weights;
};

/// Merge two canonical supports into one sorted atom list with aligned
/// weight vectors.
template <class T>
UnionSupport<T> union_support(const DiscreteMeasure<T>& p, const DiscreteMeasure<T>& q) {
  UnionSupport<T> u;
  std::size_t i = 0, j = 0;
  while (i < p.size() || j < q.size()) {
    if (j >= q.size() ||
        (i < p.size() && element_less(p.support()[i], q.support()[j]))) {
      u.atoms.push_back(p.support()[i]);
      u.p_weights.push_back(p.weights()[i]);
      u.q_weights.push_back(0.0);
      ++i;
    } else if (i >= p.size() || element_less(q.support()[j], p.support()[i])) {
      u.atoms.push_back(q.support()[j]);
      u.p_weights.push_back(0.0);
      u.q_weights.push_back(q.weights()[j]);
      ++j;
    } else {  // same atom (or within the atom tolerance)
      u.atoms.push_back(p.support()[i]);
      u.p_weights.push_back(p.weights()[i]);
      u.q_weights.push_back(q.weights()[j]);
      ++i;
      ++j;
    }
  }
  return u;
}

namespace detail {

struct BlPair {
  int i = 0;
  int j = 0;
  double d = 0.0;
};

BlSolution bl_simplex_core(const std::vector<double>& c,
                           const std::vector<BlPair>& pairs,
                           long max_iterations);

BlSolution bl_chain_core(const std::vector<double>& positions,
                         const std::vector<double>& c,
                         bool want_certificate);

void dump_bl_instance(const std::string& path,
                      const std::vector<std::string>& atom_reprs,
                      const std::vector<double>& p_weights,
                      const std::vector<double>& q_weights,
                      const std::vector<std::vector<double>>& dist,
                      const BlSolution& solution);

inline constexpr std::size_t kChainAutoThreshold = 48;

}  // namespace detail

inline std::string element_repr(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

template <class T>
std::string element_repr(const std::vector<T>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += element_repr(v[i]);
  }
  return s + ")";
}

template <class T>
std::string element_repr(const DiscreteMeasure<T>& m) {
  std::string s = "{";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += " ";
    s += element_repr(m.support()[i]) + ":" + element_repr(m.weights()[i]);
  }
  return s + "}";
}

/// Bounded Lipschitz distance between discrete measures, with the optimal
/// test function as certificate. Symmetric by construction: the canonical
/// orientation of (p, q) is solved, which also makes bl(p,q) and bl(q,p)
/// bitwise equal.
template <class T>
BlSolution bl_distance(const DiscreteMeasure<T>& p, const DiscreteMeasure<T>& q,
                       const MetricSpace<T>& space, const BlOptions& opt = {}) {
  if (space.contains) {
    for (const auto& a : p.support())
      if (!space.contains(a)) throw DomainError("bl_distance: p atom outside space");
    for (const auto& a : q.support())
      if (!space.contains(a)) throw DomainError("bl_distance: q atom outside space");
  }

  if (p == q) {
    BlSolution zero;
    zero.certificate.function_values.assign(p.size(), 0.0);
    zero.method_used = BlMethod::kSimplex;
    return zero;
  }

  const bool swapped = element_less(q, p);
  const DiscreteMeasure<T>& a = swapped ? q : p;
  const DiscreteMeasure<T>& b = swapped ? p : q;

  UnionSupport<T> u = union_support(a, b);
  const std::size_t k = u.atoms.size();
  if (k > opt.max_union_support)
    throw CapacityError("bl_distance: union support " + std::to_string(k) +
                        " exceeds cap " + std::to_string(opt.max_union_support));

  std::vector<double> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = u.p_weights[i] - u.q_weights[i];

  BlMethod method = opt.method;
  if (method == BlMethod::kChain && !space.line_like())
    throw DomainError("bl_distance: chain method requires a line-like space");
  if (method == BlMethod::kAuto)
    method = (space.line_like() && k > detail::kChainAutoThreshold) ? BlMethod::kChain
                                                                    : BlMethod::kSimplex;

  BlSolution sol;
  if (method == BlMethod::kChain) {
    std::vector<double> pos(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = space.coordinate(u.atoms[i]);
    sol = detail::bl_chain_core(pos, c, opt.want_certificate);
  } else {
    std::vector<detail::BlPair> pairs;
    if (space.line_like() && k > 300) {
      // Adjacent pairs generate all Lipschitz constraints on a line.
      std::vector<double> pos(k);
      for (std::size_t i = 0; i < k; ++i) pos[i] = space.coordinate(u.atoms[i]);
      std::vector<int> order(k);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int x, int y) { return pos[x] < pos[y]; });
      pairs.reserve(k - 1);
      for (std::size_t t = 0; t + 1 < k; ++t)
        pairs.push_back({order[t], order[t + 1],
                         std::fabs(pos[order[t + 1]] - pos[order[t]])});
    } else {
      pairs.reserve(k * (k - 1) / 2);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
          pairs.push_back({static_cast<int>(i), static_cast<int>(j),
                           space.dist(u.atoms[i], u.atoms[j])});
    }
    sol = detail::bl_simplex_core(c, pairs, opt.max_iterations);
  }
  sol.method_used = method;

  if (swapped)
    for (double& f : sol.certificate.function_values) f = -f;

  if (!opt.dump_path.empty()) {
    std::vector<std::string> reprs;
    reprs.reserve(k);
    for (const auto& atom : u.atoms) reprs.push_back(element_repr(atom));
    std::vector<std::vector<double>> dist(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        dist[i][j] = dist[j][i] = space.dist(u.atoms[i], u.atoms[j]);
    const std::vector<double>& pw = swapped ? u.q_weights : u.p_weights;
    const std::vector<double>& qw = swapped ? u.p_weights : u.q_weights;
    detail::dump_bl_instance(opt.dump_path, reprs, pw, qw, dist, sol);
  }
  return sol;
}

/// Value-only entry point; skips certificate construction on the fast path.
template <class T>
double bl_value(const DiscreteMeasure<T>& p, const DiscreteMeasure<T>& q,
                const MetricSpace<T>& space, BlOptions opt = {}) {
  opt.want_certificate = false;
  opt.dump_path.clear();
  return bl_distance(p, q, space, opt).value;
}

/// Space of discrete measures over `inner` under the bounded Lipschitz
/// distance. The two-Dirac pair attains 2D/(2+D) on a diameter-D ground
/// space, which bounds the whole measure space.
template <class T>
MetricSpace<DiscreteMeasure<T>> measure_space(MetricSpace<T> inner) {
  MetricSpace<DiscreteMeasure<T>> s;
  s.dist = [inner](const DiscreteMeasure<T>& p, const DiscreteMeasure<T>& q) {
    return bl_value(p, q, inner);
  };
  if (inner.diameter_bound) {
    double d = *inner.diameter_bound;
    s.diameter_bound = 2.0 * d / (2.0 + d);
  } else {
    s.diameter_bound = 2.0;
  }
  return s;
}

}  // namespace robustboot
