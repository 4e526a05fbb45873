#include "robustboot/mixing.hpp"

#include <cmath>

namespace robustboot {

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix matmul(const Matrix& a, const Matrix& b) {
  const std::size_t s = a.size();
  Matrix out(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t k = 0; k < s; ++k)
      for (std::size_t j = 0; j < s; ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

Matrix matpow(Matrix base, std::size_t e) {
  const std::size_t s = base.size();
  Matrix result(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i) result[i][i] = 1.0;
  while (e > 0) {
    if (e & 1) result = matmul(result, base);
    base = matmul(base, base);
    e >>= 1;
  }
  return result;
}

}  // namespace

double exact_alpha_markov(const std::vector<std::vector<double>>& transition,
                          std::size_t lag) {
  if (lag < 1) throw DomainError("exact_alpha_markov: lag must be >= 1");
  const std::size_t s = transition.size();
  if (s > 3)
    throw CapabilityError("exact_alpha_markov: state space larger than 3");
  std::vector<double> pi = stationary_distribution(transition);  // validates

  Matrix step = matpow(transition, lag);
  // joint[x][y] = P(Z_1 = x, Z_{1+lag} = y)
  Matrix joint(s, std::vector<double>(s, 0.0));
  for (std::size_t x = 0; x < s; ++x)
    for (std::size_t y = 0; y < s; ++y) joint[x][y] = pi[x] * step[x][y];

  double alpha = 0.0;
  const std::size_t subsets = std::size_t{1} << s;
  for (std::size_t a = 0; a < subsets; ++a) {
    double pa = 0.0;
    for (std::size_t x = 0; x < s; ++x)
      if (a & (std::size_t{1} << x)) pa += pi[x];
    for (std::size_t b = 0; b < subsets; ++b) {
      double pb = 0.0, pab = 0.0;
      for (std::size_t y = 0; y < s; ++y) {
        if (!(b & (std::size_t{1} << y))) continue;
        pb += pi[y];
        for (std::size_t x = 0; x < s; ++x)
          if (a & (std::size_t{1} << x)) pab += joint[x][y];
      }
      alpha = std::max(alpha, std::fabs(pab - pa * pb));
    }
  }
  return alpha;
}

double weak_bi_mixing_average(const ProcessSpec& spec, std::size_t n) {
  if (n < 1) throw DomainError("weak_bi_mixing_average: n must be >= 1");
  if (spec.kind != ProcessSpec::Kind::kMarkovChain)
    throw CapabilityError("weak_bi_mixing_average: exact coefficients only for markov_chain");
  double acc = 0.0;
  for (std::size_t lag = 1; lag < n; ++lag) {
    double a = exact_alpha_markov(spec.chain.transition, lag);
    acc += 2.0 * static_cast<double>(n - lag) * a;
  }
  return acc / (static_cast<double>(n) * static_cast<double>(n));
}

MixingDiagnostics mixing_diagnostics(const ProcessSpec& spec, std::size_t m_max,
                                     const std::vector<std::size_t>& n_grid) {
  MixingDiagnostics diag;
  diag.n_grid = n_grid;
  if (spec.kind == ProcessSpec::Kind::kAr1Transformed) {
    // No exact alpha for continuous-state chains; geometric decay bound only.
    diag.geometric_rate = std::fabs(spec.phi);
    return diag;
  }
  if (spec.kind != ProcessSpec::Kind::kMarkovChain)
    throw CapabilityError("mixing_diagnostics: supported kinds are markov_chain, ar1_transformed");

  diag.alpha_coeffs.reserve(m_max);
  for (std::size_t lag = 1; lag <= m_max; ++lag)
    diag.alpha_coeffs.push_back(exact_alpha_markov(spec.chain.transition, lag));

  for (std::size_t n : n_grid) diag.weak_bi_averages.push_back(weak_bi_mixing_average(spec, n));

  // tail_sums[m-1] = sum_{lag=m+1..m_max} alpha(lag), m = 1..m_max
  diag.tail_sums.assign(m_max, 0.0);
  double tail = 0.0;
  for (std::size_t m = m_max; m-- > 1;) {
    tail += diag.alpha_coeffs[m];  // alpha at lag m+1
    diag.tail_sums[m - 1] = tail;
  }

  // log-log least squares over n = 1..m_max/2 where the tail is positive.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t m = 1; m <= m_max / 2; ++m) {
    double t = diag.tail_sums[m - 1];
    if (t <= 1e-300) break;
    double x = std::log(static_cast<double>(m));
    double y = std::log(t);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    double denom = static_cast<double>(count) * sxx - sx * sx;
    if (std::fabs(denom) > 1e-12) {
      double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;
      diag.gamma_hat = -slope;
      diag.log_c = (sy - slope * sx) / static_cast<double>(count);
    }
  }

  for (std::size_t d = 1; d <= 3; ++d) {
    double sum = 0.0;
    double alpha0 = 0.25;  // m = 0 term: overlapping algebras, capped at 1/4
    sum += std::sqrt(alpha0);
    for (std::size_t m = 1; m <= m_max; ++m)
      sum += std::pow(static_cast<double>(m + 1), static_cast<double>(8 * d + 7)) *
             std::sqrt(diag.alpha_coeffs[m - 1]);
    diag.dimension_condition_partials.push_back(sum);
  }

  if (spec.chain.transition.size() == 2) {
    double p = spec.chain.transition[0][1];
    double q = spec.chain.transition[1][0];
    diag.geometric_rate = std::fabs(1.0 - p - q);
  }
  return diag;
}

}  // namespace robustboot
