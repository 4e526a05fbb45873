#include <cassert>
#include <cstring>
#include <fstream>

#include "robustboot/bl.hpp"
#include "robustboot/errors.hpp"

namespace robustboot {
namespace detail {

namespace {

// ---------------------------------------------------------------------------
// Revised simplex on the flow form of the BL program:
//
//   min tau
//     row i (0..k-1):  sum_j (g_ij - g_ji) + a_i - b_i = c_i
//     row L (k):       sum_e d_e g_e - tau + s_L = 0
//     row M (k+1):     sum_i (a_i + b_i) - tau + s_M = 0
//     all variables >= 0
//
// {a_i or b_i per atom row, tau, s_L} is a feasible start, so no phase one.
// The optimal row multipliers are the primal solution: f_i = y_i, L = -y_L,
// M = -y_M, and the optimal basis holds the flow-side certificate.
// ---------------------------------------------------------------------------

constexpr double kReducedCostTol = 1e-10;
constexpr double kPivotTol = 1e-11;

class BlSimplex {
 public:
  BlSimplex(const std::vector<double>& c, const std::vector<BlPair>& pairs)
      : c_(c), pairs_(pairs), k_(c.size()), m_(k_ + 2) {
    n_cols_ = 2 * k_ + 2 * pairs_.size() + 3;
    tau_id_ = 2 * k_ + 2 * pairs_.size();
    sl_id_ = tau_id_ + 1;
    sm_id_ = tau_id_ + 2;
  }

  BlSolution solve(long max_iterations) {
    init_basis();
    long iter = 0;
    long degenerate_run = 0;
    bool bland = false;
    double last_objective = objective();
    while (iter < max_iterations) {
      ++iter;
      extract_y();
      std::size_t entering = n_cols_;
      double best = -kReducedCostTol;
      for (std::size_t j = 0; j < n_cols_; ++j) {
        if (in_basis_[j]) continue;
        double r = reduced_cost(j);
        if (bland) {
          if (r < -kReducedCostTol) {
            entering = j;
            break;
          }
        } else if (r < best) {
          best = r;
          entering = j;
        }
      }
      if (entering == n_cols_) {
        return finish(iter);
      }
      column_times_binv(entering, w_);
      std::size_t leaving = m_;
      double best_ratio = 0.0;
      for (std::size_t p = 0; p < m_; ++p) {
        if (w_[p] <= kPivotTol) continue;
        double ratio = xb_[p] / w_[p];
        if (leaving == m_ || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis_[p] < basis_[leaving])) {
          leaving = p;
          best_ratio = ratio;
        }
      }
      if (leaving == m_)
        throw NumericError("bl simplex: unbounded direction", iter);
      pivot(entering, leaving);
      if ((iter & 1023) == 0 && m_ <= 700) refactorize();

      double obj = objective();
      if (obj > last_objective - 1e-13) {
        if (++degenerate_run > 80) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
        last_objective = obj;
      }
    }
    throw NumericError("bl simplex: iteration cap reached", iter);
  }

 private:
  const std::vector<double>& c_;
  const std::vector<BlPair>& pairs_;
  std::size_t k_, m_, n_cols_, tau_id_, sl_id_, sm_id_;
  std::vector<int> basis_;          // column id per basis position
  std::vector<char> in_basis_;      // per column id
  std::vector<double> binv_;        // m x m row-major
  std::vector<double> xb_;          // basic values
  std::vector<double> y_;           // multipliers c_B B^-1
  std::vector<double> w_;           // pivot column in basis coordinates

  double& binv(std::size_t r, std::size_t c) { return binv_[r * m_ + c]; }

  // Column entries of A by id. At most 3 nonzeros.
  int col_entries(std::size_t id, std::size_t rows[3], double coefs[3]) const {
    if (id < k_) {  // a_i
      rows[0] = id; coefs[0] = 1.0;
      rows[1] = k_ + 1; coefs[1] = 1.0;
      return 2;
    }
    if (id < 2 * k_) {  // b_i
      rows[0] = id - k_; coefs[0] = -1.0;
      rows[1] = k_ + 1; coefs[1] = 1.0;
      return 2;
    }
    if (id < tau_id_) {  // gamma
      std::size_t t = (id - 2 * k_) / 2;
      bool reversed = (id - 2 * k_) & 1;
      const BlPair& pr = pairs_[t];
      rows[0] = static_cast<std::size_t>(reversed ? pr.j : pr.i); coefs[0] = 1.0;
      rows[1] = static_cast<std::size_t>(reversed ? pr.i : pr.j); coefs[1] = -1.0;
      rows[2] = k_; coefs[2] = pr.d;
      return 3;
    }
    if (id == tau_id_) {
      rows[0] = k_; coefs[0] = -1.0;
      rows[1] = k_ + 1; coefs[1] = -1.0;
      return 2;
    }
    if (id == sl_id_) {
      rows[0] = k_; coefs[0] = 1.0;
      return 1;
    }
    rows[0] = k_ + 1; coefs[0] = 1.0;  // s_M
    return 1;
  }

  void init_basis() {
    basis_.assign(m_, -1);
    in_basis_.assign(n_cols_, 0);
    for (std::size_t i = 0; i < k_; ++i)
      basis_[i] = static_cast<int>(c_[i] >= 0.0 ? i : k_ + i);
    basis_[k_] = static_cast<int>(tau_id_);
    basis_[k_ + 1] = static_cast<int>(sl_id_);
    for (std::size_t p = 0; p < m_; ++p) in_basis_[basis_[p]] = 1;

    // Analytic inverse of the start basis:
    //   z_i = s_i rhs_i, z_tau = sum s_i rhs_i - rhs_M, z_sL = rhs_L + z_tau
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < k_; ++i) binv(i, i) = (c_[i] >= 0.0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < k_; ++i) {
      binv(k_, i) = binv(i, i);
      binv(k_ + 1, i) = binv(i, i);
    }
    binv(k_, k_ + 1) = -1.0;
    binv(k_ + 1, k_) = 1.0;
    binv(k_ + 1, k_ + 1) = -1.0;

    xb_.assign(m_, 0.0);
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < k_; ++i) {
      xb_[i] = std::fabs(c_[i]);
      sum_abs += xb_[i];
    }
    xb_[k_] = sum_abs;      // tau
    xb_[k_ + 1] = sum_abs;  // s_L
    y_.assign(m_, 0.0);
    w_.assign(m_, 0.0);
  }

  void extract_y() {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (std::size_t p = 0; p < m_; ++p) {
      if (basis_[p] == static_cast<int>(tau_id_)) {
        for (std::size_t r = 0; r < m_; ++r) y_[r] = binv(p, r);
        return;
      }
    }
  }

  double reduced_cost(std::size_t id) const {
    double cost = (id == tau_id_) ? 1.0 : 0.0;
    std::size_t rows[3];
    double coefs[3];
    int nnz = col_entries(id, rows, coefs);
    double ya = 0.0;
    for (int t = 0; t < nnz; ++t) ya += y_[rows[t]] * coefs[t];
    return cost - ya;
  }

  void column_times_binv(std::size_t id, std::vector<double>& out) {
    std::size_t rows[3];
    double coefs[3];
    int nnz = col_entries(id, rows, coefs);
    std::fill(out.begin(), out.end(), 0.0);
    for (int t = 0; t < nnz; ++t) {
      const double coef = coefs[t];
      const std::size_t col = rows[t];
      for (std::size_t r = 0; r < m_; ++r) out[r] += coef * binv(r, col);
    }
  }

  void pivot(std::size_t entering, std::size_t leaving) {
    const double piv = w_[leaving];
    const double inv = 1.0 / piv;
    for (std::size_t cidx = 0; cidx < m_; ++cidx) binv(leaving, cidx) *= inv;
    xb_[leaving] *= inv;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == leaving) continue;
      double factor = w_[r];
      if (factor == 0.0) continue;
      for (std::size_t cidx = 0; cidx < m_; ++cidx)
        binv(r, cidx) -= factor * binv(leaving, cidx);
      xb_[r] -= factor * xb_[leaving];
      if (xb_[r] < 0.0 && xb_[r] > -1e-11) xb_[r] = 0.0;
    }
    in_basis_[basis_[leaving]] = 0;
    basis_[leaving] = static_cast<int>(entering);
    in_basis_[entering] = 1;
  }

  double objective() const {
    for (std::size_t p = 0; p < m_; ++p)
      if (basis_[p] == static_cast<int>(tau_id_)) return xb_[p];
    return 0.0;
  }

  // Rebuild B^-1 from the basis columns by Gauss-Jordan.
  void refactorize() {
    std::vector<double> a(m_ * m_, 0.0);
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t p = 0; p < m_; ++p) {
      std::size_t rows[3];
      double coefs[3];
      int nnz = col_entries(static_cast<std::size_t>(basis_[p]), rows, coefs);
      for (int t = 0; t < nnz; ++t) a[rows[t] * m_ + p] = coefs[t];
      inv[p * m_ + p] = 1.0;
    }
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m_; ++r)
        if (std::fabs(a[r * m_ + col]) > std::fabs(a[piv * m_ + col])) piv = r;
      if (std::fabs(a[piv * m_ + col]) < 1e-14) return;  // keep product form
      if (piv != col) {
        for (std::size_t cc = 0; cc < m_; ++cc) {
          std::swap(a[piv * m_ + cc], a[col * m_ + cc]);
          std::swap(inv[piv * m_ + cc], inv[col * m_ + cc]);
        }
      }
      double scale = 1.0 / a[col * m_ + col];
      for (std::size_t cc = 0; cc < m_; ++cc) {
        a[col * m_ + cc] *= scale;
        inv[col * m_ + cc] *= scale;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        double factor = a[r * m_ + col];
        if (factor == 0.0) continue;
        for (std::size_t cc = 0; cc < m_; ++cc) {
          a[r * m_ + cc] -= factor * a[col * m_ + cc];
          inv[r * m_ + cc] -= factor * inv[col * m_ + cc];
        }
      }
    }
    binv_.swap(inv);
    // Refresh basic values: x_B = B^-1 b with b = (c, 0, 0).
    for (std::size_t p = 0; p < m_; ++p) {
      double v = 0.0;
      for (std::size_t i = 0; i < k_; ++i) v += binv(p, i) * c_[i];
      xb_[p] = std::max(v, 0.0);
    }
  }

  BlSolution finish(long iter) {
    extract_y();
    BlSolution sol;
    sol.iterations = iter;
    sol.value = objective();
    sol.certificate.function_values.assign(y_.begin(), y_.begin() + k_);
    sol.certificate.lipschitz_part = std::max(0.0, -y_[k_]);
    sol.certificate.sup_part = std::max(0.0, -y_[k_ + 1]);
    sol.certificate.objective = 0.0;
    for (std::size_t i = 0; i < k_; ++i)
      sol.certificate.objective += c_[i] * sol.certificate.function_values[i];

    BlDualCertificate dual;
    dual.created.assign(k_, 0.0);
    dual.destroyed.assign(k_, 0.0);
    dual.objective = sol.value;
    for (std::size_t p = 0; p < m_; ++p) {
      std::size_t id = static_cast<std::size_t>(basis_[p]);
      double v = xb_[p];
      if (v <= 0.0) continue;
      if (id < k_) {
        dual.created[id] += v;
      } else if (id < 2 * k_) {
        dual.destroyed[id - k_] += v;
      } else if (id < tau_id_) {
        std::size_t t = (id - 2 * k_) / 2;
        bool reversed = (id - 2 * k_) & 1;
        const BlPair& pr = pairs_[t];
        BlDualCertificate::Arc arc;
        arc.from = static_cast<std::size_t>(reversed ? pr.j : pr.i);
        arc.to = static_cast<std::size_t>(reversed ? pr.i : pr.j);
        arc.flow = v;
        arc.dist = pr.d;
        dual.transport.push_back(arc);
      }
    }
    sol.dual = std::move(dual);
    return sol;
  }
};

// ---------------------------------------------------------------------------
// 1-D parametric route. For a line metric the Lipschitz constraints reduce to
// adjacent gaps, and for fixed M (with L = 1 - M, tight at an optimum) the
// inner maximization is a chain dynamic program over concave piecewise linear
// value functions. value(M) is concave, so a golden-section search over M
// solves the full program.
// ---------------------------------------------------------------------------

struct ConcavePwl {
  double lo = 0.0, hi = 0.0;
  double v_lo = 0.0;
  std::vector<double> xs;      // interior breakpoints, ascending
  std::vector<double> slopes;  // xs.size() + 1 entries, nonincreasing

  void init_linear(double slope, double lo_, double hi_, double value_lo) {
    lo = lo_;
    hi = hi_;
    v_lo = value_lo;
    xs.clear();
    slopes.assign(1, slope);
  }

  double eval(double x) const {
    double v = v_lo;
    double prev = lo;
    for (std::size_t s = 0; s < slopes.size(); ++s) {
      double right = (s < xs.size()) ? xs[s] : hi;
      double end = std::min(x, right);
      if (end > prev) v += slopes[s] * (end - prev);
      if (x <= right) break;
      prev = right;
    }
    return v;
  }

  // [plateau_lo, plateau_hi]: the argmax set.
  void peak(double& plateau_lo, double& plateau_hi) const {
    plateau_lo = lo;
    plateau_hi = hi;
    for (std::size_t s = 0; s < slopes.size(); ++s) {
      if (slopes[s] > 0.0) plateau_lo = (s < xs.size()) ? xs[s] : hi;
      if (slopes[s] < 0.0) {
        plateau_hi = (s == 0) ? lo : xs[s - 1];
        break;
      }
    }
    if (plateau_hi < plateau_lo) plateau_hi = plateau_lo;
  }

  double peak_arg() const {
    double a, b;
    peak(a, b);
    return 0.5 * (a + b);
  }

  double max_value() const { return eval(peak_arg()); }

  // Sliding-window maximum of radius r: increasing segments shift left by r,
  // decreasing segments shift right, and the argmax plateau widens by 2r.
  void spread(double r) {
    if (r <= 0.0) return;
    double plo, phi;
    peak(plo, phi);
    std::vector<double> nxs, nslopes;
    nxs.reserve(xs.size() + 2);
    nslopes.reserve(slopes.size() + 1);
    double prev = lo;
    // increasing part
    for (std::size_t s = 0; s < slopes.size() && slopes[s] > 0.0; ++s) {
      double right = (s < xs.size()) ? xs[s] : hi;
      nslopes.push_back(slopes[s]);
      nxs.push_back(right - r);
      prev = right;
    }
    // plateau
    nslopes.push_back(0.0);
    nxs.push_back(phi + r);
    // decreasing part
    for (std::size_t s = 0; s < slopes.size(); ++s) {
      if (slopes[s] >= 0.0) continue;
      double right = (s < xs.size()) ? xs[s] : hi;
      nslopes.push_back(slopes[s]);
      nxs.push_back(right + r);
    }
    nxs.pop_back();  // last boundary becomes the domain end
    lo -= r;
    hi += r;
    xs = std::move(nxs);
    slopes = std::move(nslopes);
    normalize();
  }

  void clamp_domain(double nlo, double nhi) {
    double new_vlo = eval(nlo);
    std::vector<double> nxs, nslopes;
    double prev = lo;
    for (std::size_t s = 0; s < slopes.size(); ++s) {
      double right = (s < xs.size()) ? xs[s] : hi;
      double seg_lo = std::max(prev, nlo);
      double seg_hi = std::min(right, nhi);
      if (seg_hi > seg_lo) {
        nslopes.push_back(slopes[s]);
        nxs.push_back(seg_hi);
      }
      prev = right;
      if (prev >= nhi) break;
    }
    if (nslopes.empty()) nslopes.push_back(0.0);  // degenerate domain
    if (!nxs.empty()) nxs.pop_back();
    lo = nlo;
    hi = nhi;
    v_lo = new_vlo;
    xs = std::move(nxs);
    slopes = std::move(nslopes);
  }

  void add_linear(double c) {
    for (double& s : slopes) s += c;
    v_lo += c * lo;
  }

  // Merge equal-slope neighbours and drop empty segments.
  void normalize() {
    if (slopes.size() <= 1) return;
    std::vector<double> nxs, nslopes;
    double prev = lo;
    for (std::size_t s = 0; s < slopes.size(); ++s) {
      double right = (s < xs.size()) ? xs[s] : hi;
      if (right <= prev && s + 1 < slopes.size()) continue;  // empty segment
      if (!nslopes.empty() && nslopes.back() == slopes[s]) {
        nxs.back() = right;
      } else {
        nslopes.push_back(slopes[s]);
        nxs.push_back(right);
      }
      prev = right;
    }
    if (!nxs.empty()) nxs.pop_back();
    xs = std::move(nxs);
    slopes = std::move(nslopes);
  }
};

struct ChainInstance {
  std::vector<double> pos;  // sorted ascending
  std::vector<double> c;    // aligned with pos
};

double chain_value(const ChainInstance& in, double M, std::vector<double>* peaks) {
  const std::size_t k = in.pos.size();
  const double L = 1.0 - M;
  ConcavePwl v;
  v.init_linear(in.c[0], -M, M, in.c[0] * -M);
  if (peaks) (*peaks)[0] = v.peak_arg();
  for (std::size_t i = 1; i < k; ++i) {
    v.spread(L * (in.pos[i] - in.pos[i - 1]));
    v.clamp_domain(-M, M);
    v.add_linear(in.c[i]);
    v.normalize();
    if (peaks) (*peaks)[i] = v.peak_arg();
  }
  return v.max_value();
}

}  // namespace

BlSolution bl_simplex_core(const std::vector<double>& c,
                           const std::vector<BlPair>& pairs,
                           long max_iterations) {
  bool all_zero = true;
  for (double v : c)
    if (std::fabs(v) > 1e-15) all_zero = false;
  if (all_zero || c.size() < 2) {
    BlSolution zero;
    zero.certificate.function_values.assign(c.size(), 0.0);
    return zero;
  }
  BlSimplex simplex(c, pairs);
  return simplex.solve(max_iterations);
}

BlSolution bl_chain_core(const std::vector<double>& positions,
                         const std::vector<double>& c,
                         bool want_certificate) {
  const std::size_t k = positions.size();
  BlSolution sol;
  if (k < 2) {
    sol.certificate.function_values.assign(k, 0.0);
    return sol;
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
  ChainInstance in;
  in.pos.resize(k);
  in.c.resize(k);
  for (std::size_t t = 0; t < k; ++t) {
    in.pos[t] = positions[order[t]];
    in.c[t] = c[order[t]];
  }

  // Golden-section over M in [0,1]; value(M) is concave with value 0 at both
  // ends, so the bracket always contains the maximum.
  const double gr = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double m1 = hi - gr * (hi - lo);
  double m2 = lo + gr * (hi - lo);
  double f1 = chain_value(in, m1, nullptr);
  double f2 = chain_value(in, m2, nullptr);
  long evals = 2;
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + gr * (hi - lo);
      f2 = chain_value(in, m2, nullptr);
    } else {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - gr * (hi - lo);
      f1 = chain_value(in, m1, nullptr);
    }
    ++evals;
  }
  const double m_star = 0.5 * (lo + hi);
  sol.iterations = evals;

  std::vector<double> peaks(k, 0.0);
  double value = chain_value(in, m_star, &peaks);
  sol.value = value;
  sol.certificate.sup_part = m_star;
  sol.certificate.lipschitz_part = 1.0 - m_star;
  sol.certificate.function_values.assign(k, 0.0);
  (void)want_certificate;  // backtracking is O(k), always worth it
  // Backtrack: each stage's optimum is its peak clamped to the window
  // reachable from the next stage's choice.
  const double L = 1.0 - m_star;
  std::vector<double> f_sorted(k, 0.0);
  f_sorted[k - 1] = peaks[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) {
    double r = L * (in.pos[i + 1] - in.pos[i]);
    f_sorted[i] = std::clamp(peaks[i], f_sorted[i + 1] - r, f_sorted[i + 1] + r);
  }
  double objective = 0.0;
  for (std::size_t t = 0; t < k; ++t) objective += in.c[t] * f_sorted[t];
  for (std::size_t t = 0; t < k; ++t)
    sol.certificate.function_values[order[t]] = f_sorted[t];
  sol.certificate.objective = objective;
  sol.value = std::max(value, objective);
  return sol;
}

void dump_bl_instance(const std::string& path,
                      const std::vector<std::string>& atom_reprs,
                      const std::vector<double>& p_weights,
                      const std::vector<double>& q_weights,
                      const std::vector<std::vector<double>>& dist,
                      const BlSolution& solution) {
  std::ofstream out(path);
  if (!out) throw DomainError("dump_bl_instance: cannot open " + path);
  const std::size_t k = atom_reprs.size();
  out << "bl_instance v1\n";
  out << "atoms " << k << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < k; ++i)
    out << i << " " << atom_reprs[i] << " p=" << p_weights[i]
        << " q=" << q_weights[i] << "\n";
  out << "distance_matrix\n";
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) out << (j ? " " : "") << dist[i][j];
    out << "\n";
  }
  out << "solution value=" << solution.value
      << " L=" << solution.certificate.lipschitz_part
      << " M=" << solution.certificate.sup_part
      << " iterations=" << solution.iterations << "\n";
  out << "f";
  for (double f : solution.certificate.function_values) out << " " << f;
  out << "\n";
}

}  // namespace detail
}  // namespace robustboot
