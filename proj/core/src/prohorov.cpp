#include "robustboot/prohorov.hpp"

#include <limits>
#include <queue>

namespace robustboot {
namespace detail {

namespace {

// Dinic max-flow on double capacities. Graphs here are tiny bipartite
// networks (source, p atoms, q atoms, sink).
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t n) : head_(n, -1), level_(n), it_(n) {}

  void add_edge(std::size_t u, std::size_t v, double cap) {
    edges_.push_back({static_cast<int>(v), head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({static_cast<int>(u), head_[v], 0.0});
    head_[v] = static_cast<int>(edges_.size()) - 1;
  }

  double run(std::size_t s, std::size_t t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      it_ = head_;
      for (;;) {
        double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= 1e-15) break;
        flow += pushed;
      }
    }
    return flow;
  }

  /// Source side of the final min cut.
  std::vector<bool> source_side(std::size_t s) const {
    std::vector<bool> seen(head_.size(), false);
    std::queue<std::size_t> bfsq;
    bfsq.push(s);
    seen[s] = true;
    while (!bfsq.empty()) {
      std::size_t u = bfsq.front();
      bfsq.pop();
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > 1e-12 && !seen[edges_[e].to]) {
          seen[edges_[e].to] = true;
          bfsq.push(edges_[e].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    int next;
    double cap;
  };
  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    q.push(s);
    level_[s] = 0;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > 1e-15 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(std::size_t u, std::size_t t, double limit) {
    if (u == t) return limit;
    for (int& e = it_[u]; e != -1; e = edges_[e].next) {
      Edge& fwd = edges_[e];
      if (fwd.cap > 1e-15 && level_[fwd.to] == level_[u] + 1) {
        double pushed = dfs(fwd.to, t, std::min(limit, fwd.cap));
        if (pushed > 1e-15) {
          fwd.cap -= pushed;
          edges_[e ^ 1].cap += pushed;
          return pushed;
        }
      }
    }
    return 0.0;
  }
};

struct FeasibilityOutcome {
  bool feasible = false;
  std::vector<bool> reachable;  // source side when infeasible
};

// Strassen condition at eps: a coupling with P{d > eps} <= eps exists iff the
// bipartite flow (edges where d_ij <= eps) moves at least 1 - eps of mass.
FeasibilityOutcome strassen_feasible(const std::vector<double>& pw,
                                     const std::vector<double>& qw,
                                     const std::vector<std::vector<double>>& dist,
                                     double eps, bool want_cut) {
  const std::size_t kp = pw.size(), kq = qw.size();
  const std::size_t source = 0, sink = kp + kq + 1;
  MaxFlow net(kp + kq + 2);
  for (std::size_t i = 0; i < kp; ++i) net.add_edge(source, 1 + i, pw[i]);
  for (std::size_t j = 0; j < kq; ++j) net.add_edge(1 + kp + j, sink, qw[j]);
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kq; ++j)
      if (dist[i][j] <= eps + 1e-12) net.add_edge(1 + i, 1 + kp + j, 2.0);
  double flow = net.run(source, sink);
  FeasibilityOutcome out;
  out.feasible = flow >= 1.0 - eps - 1e-12;
  if (!out.feasible && want_cut) out.reachable = net.source_side(source);
  return out;
}

}  // namespace

ProhorovResult prohorov_core(const std::vector<double>& pw,
                             const std::vector<double>& qw,
                             const std::vector<std::vector<double>>& dist,
                             const ProhorovOptions& opt) {
  ProhorovResult result;
  // eps = 1 is always feasible, and so is the largest pairwise distance.
  double hi = 1.0;
  double lo = 0.0;
  if (strassen_feasible(pw, qw, dist, 0.0, false).feasible) {
    result.epsilon = 0.0;
    return result;
  }
  while (hi - lo > opt.tolerance) {
    double mid = 0.5 * (lo + hi);
    if (strassen_feasible(pw, qw, dist, mid, false).feasible)
      hi = mid;
    else
      lo = mid;
  }
  result.epsilon = hi;

  if (opt.want_witness && result.epsilon > 4.0 * opt.tolerance) {
    double probe = result.epsilon - 2.0 * opt.tolerance;
    auto outcome = strassen_feasible(pw, qw, dist, probe, true);
    if (!outcome.feasible) {
      std::vector<std::size_t> witness;
      for (std::size_t i = 0; i < pw.size(); ++i)
        if (outcome.reachable[1 + i]) witness.push_back(i);
      if (!witness.empty()) {
        result.witness_set = std::move(witness);
        result.witness_epsilon = probe;
      }
    }
  }
  return result;
}

}  // namespace detail
}  // namespace robustboot
