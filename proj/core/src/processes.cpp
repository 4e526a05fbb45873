#include "robustboot/processes.hpp"

#include <cmath>

#include "robustboot/bl.hpp"
#include "robustboot/parallel.hpp"

namespace robustboot {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

std::size_t draw_index(const DiscreteMeasure<double>& m, Rng& rng) {
  double u = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    cum += m.weights()[i];
    if (u < cum) return i;
  }
  return m.size() - 1;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return (n % 2) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t i = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

// Pushforward of N(a, 1) through x -> lo + (hi-lo)*clamp((x+c)/(2c), 0, 1):
// boundary atoms catch the clipped tails, interior cells use CDF differences.
DiscreteMeasure<double> clipped_normal_measure(double a, double c, double lo, double hi,
                                               std::size_t resolution) {
  std::vector<double> xs, ws;
  xs.reserve(resolution + 2);
  ws.reserve(resolution + 2);
  double w_lo = normal_cdf(-c - a);
  double w_hi = 1.0 - normal_cdf(c - a);
  xs.push_back(lo);
  ws.push_back(w_lo);
  for (std::size_t j = 0; j < resolution; ++j) {
    double u0 = static_cast<double>(j) / static_cast<double>(resolution);
    double u1 = static_cast<double>(j + 1) / static_cast<double>(resolution);
    double x0 = u0 * 2.0 * c - c;
    double x1 = u1 * 2.0 * c - c;
    double w = normal_cdf(x1 - a) - normal_cdf(x0 - a);
    double u_mid = 0.5 * (u0 + u1);
    xs.push_back(lo + (hi - lo) * u_mid);
    ws.push_back(w);
  }
  xs.push_back(hi);
  ws.push_back(w_hi);
  return DiscreteMeasure<double>(std::move(xs), std::move(ws));
}

DiscreteMeasure<double> apply_rounding_to_measure(const DiscreteMeasure<double>& base,
                                                  double magnitude, double lo, double hi,
                                                  std::size_t resolution) {
  // Smear every atom uniformly over [x - mag, x + mag]; clipped mass piles
  // at the interval ends, mirroring the path-level clamp.
  std::vector<double> grid_w(resolution, 0.0);
  double atom_lo = 0.0, atom_hi = 0.0;
  const double cell = (hi - lo) / static_cast<double>(resolution);
  for (std::size_t i = 0; i < base.size(); ++i) {
    double x = base.support()[i];
    double w = base.weights()[i];
    double a = x - magnitude, b = x + magnitude;
    double width = b - a;
    if (width <= 0.0) continue;
    if (a < lo) {
      atom_lo += w * (std::min(b, lo) - a) / width;
    }
    if (b > hi) {
      atom_hi += w * (b - std::max(a, hi)) / width;
    }
    double in_lo = std::max(a, lo), in_hi = std::min(b, hi);
    if (in_hi > in_lo) {
      std::size_t j0 = static_cast<std::size_t>((in_lo - lo) / cell);
      std::size_t j1 = static_cast<std::size_t>((in_hi - lo) / cell);
      j1 = std::min(j1, resolution - 1);
      for (std::size_t j = j0; j <= j1; ++j) {
        double c0 = lo + cell * static_cast<double>(j);
        double c1 = c0 + cell;
        double overlap = std::min(c1, in_hi) - std::max(c0, in_lo);
        if (overlap > 0.0) grid_w[j] += w * overlap / width;
      }
    }
  }
  std::vector<double> xs, ws;
  xs.push_back(lo);
  ws.push_back(atom_lo);
  for (std::size_t j = 0; j < resolution; ++j) {
    xs.push_back(lo + cell * (static_cast<double>(j) + 0.5));
    ws.push_back(grid_w[j]);
  }
  xs.push_back(hi);
  ws.push_back(atom_hi);
  return DiscreteMeasure<double>(std::move(xs), std::move(ws));
}

}  // namespace

Distribution1D Distribution1D::uniform(double lo, double hi) {
  if (!(lo < hi)) throw DomainError("Distribution1D::uniform: lo must be < hi");
  Distribution1D d;
  d.kind = Kind::kUniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Distribution1D Distribution1D::discrete(DiscreteMeasure<double> m) {
  Distribution1D d;
  d.kind = Kind::kDiscrete;
  d.atoms = std::move(m);
  return d;
}

Distribution1D Distribution1D::point_mass(double x) {
  Distribution1D d;
  d.kind = Kind::kPoint;
  d.point = x;
  return d;
}

double Distribution1D::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kUniform:
      return rng.uniform(lo, hi);
    case Kind::kDiscrete:
      return atoms.support()[draw_index(atoms, rng)];
    case Kind::kPoint:
      return point;
  }
  throw DomainError("Distribution1D: bad kind");
}

DiscreteMeasure<double> Distribution1D::as_measure(std::size_t resolution) const {
  switch (kind) {
    case Kind::kUniform: {
      std::vector<double> xs(resolution);
      for (std::size_t j = 0; j < resolution; ++j)
        xs[j] = lo + (hi - lo) * (static_cast<double>(j) + 0.5) / static_cast<double>(resolution);
      return DiscreteMeasure<double>::uniform_on(std::move(xs));
    }
    case Kind::kDiscrete:
      return atoms;
    case Kind::kPoint:
      return DiscreteMeasure<double>::dirac(point);
  }
  throw DomainError("Distribution1D: bad kind");
}

void Distribution1D::validate(double glo, double ghi) const {
  switch (kind) {
    case Kind::kUniform:
      if (lo < glo - kAtomTol || hi > ghi + kAtomTol)
        throw DomainError("Distribution1D: uniform range outside ground interval");
      return;
    case Kind::kDiscrete:
      if (atoms.empty()) throw DomainError("Distribution1D: empty discrete law");
      for (double x : atoms.support())
        if (x < glo - kAtomTol || x > ghi + kAtomTol)
          throw DomainError("Distribution1D: atom outside ground interval");
      return;
    case Kind::kPoint:
      if (point < glo - kAtomTol || point > ghi + kAtomTol)
        throw DomainError("Distribution1D: point outside ground interval");
      return;
  }
  throw DomainError("Distribution1D: bad kind");
}

void ContaminationSpec::validate() const {
  if (fraction < 0.0 || fraction > 1.0)
    throw DomainError("ContaminationSpec: fraction must be in [0,1]");
  if (magnitude < 0.0) throw DomainError("ContaminationSpec: negative magnitude");
}

double rate_value(ProcessSpec::RateTag tag, std::size_t i) {
  switch (tag) {
    case ProcessSpec::RateTag::kOneOverI:
      return 1.0 / static_cast<double>(i);
    case ProcessSpec::RateTag::kOneOverSqrtI:
      return 1.0 / std::sqrt(static_cast<double>(i));
  }
  return 0.0;
}

std::vector<double> stationary_distribution(
    const std::vector<std::vector<double>>& transition) {
  const std::size_t s = transition.size();
  if (s == 0) throw DomainError("stationary_distribution: empty matrix");
  for (const auto& row : transition) {
    if (row.size() != s) throw DomainError("stationary_distribution: not square");
    double sum = 0.0;
    for (double v : row) {
      if (v < -1e-12) throw DomainError("stationary_distribution: negative entry");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw DomainError("stationary_distribution: row sum != 1");
  }
  // Solve pi (T - I) = 0 with sum pi = 1 by Gaussian elimination on the
  // transposed system.
  std::size_t m = s + 1;
  std::vector<std::vector<double>> a(m, std::vector<double>(s + 1, 0.0));
  for (std::size_t j = 0; j < s; ++j) {
    for (std::size_t i = 0; i < s; ++i) a[j][i] = transition[i][j] - (i == j ? 1.0 : 0.0);
    a[j][s] = 0.0;
  }
  for (std::size_t i = 0; i < s; ++i) a[s][i] = 1.0;
  a[s][s] = 1.0;
  // Least squares via normal equations is overkill; eliminate directly using
  // the normalization row in place of one redundant balance row.
  a[s - 1] = a[s];
  a.pop_back();
  m = s;
  for (std::size_t col = 0; col < s; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-13)
      throw DomainError("stationary_distribution: reducible chain");
    std::swap(a[piv], a[col]);
    double scale = 1.0 / a[col][col];
    for (std::size_t c2 = col; c2 <= s; ++c2) a[col][c2] *= scale;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t c2 = col; c2 <= s; ++c2) a[r][c2] -= f * a[col][c2];
    }
  }
  std::vector<double> pi(s);
  for (std::size_t i = 0; i < s; ++i) pi[i] = std::max(0.0, a[i][s]);
  double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= total;
  return pi;
}

std::string ProcessSpec::name() const {
  switch (kind) {
    case Kind::kIid:
      return "iid";
    case Kind::kNormalDrift:
      return "normal_drift";
    case Kind::kShrinkingContamination:
      return "shrinking_contamination";
    case Kind::kMarkovChain:
      return "markov_chain";
    case Kind::kAr1Transformed:
      return "ar1_transformed";
  }
  return "unknown";
}

void ProcessSpec::validate() const {
  if (!(ground.lo < ground.hi)) throw DomainError("ProcessSpec: bad ground interval");
  switch (kind) {
    case Kind::kIid:
      iid.validate(ground.lo, ground.hi);
      break;
    case Kind::kNormalDrift:
      if (clip_half_width <= 0.0) throw DomainError("normal_drift: clip width <= 0");
      break;
    case Kind::kShrinkingContamination:
      base.validate(ground.lo, ground.hi);
      contaminant.validate(ground.lo, ground.hi);
      if (eps0 <= 0.0) throw DomainError("shrinking_contamination: eps0 must be > 0");
      break;
    case Kind::kMarkovChain: {
      std::vector<double> pi = stationary_distribution(chain.transition);
      if (chain.emissions.size() != chain.transition.size())
        throw DomainError("markov_chain: emissions size mismatch");
      for (double e : chain.emissions)
        if (e < ground.lo - kAtomTol || e > ground.hi + kAtomTol)
          throw DomainError("markov_chain: emission outside ground interval");
      break;
    }
    case Kind::kAr1Transformed:
      if (!(std::fabs(phi) < 1.0)) throw DomainError("ar1_transformed: |phi| must be < 1");
      break;
  }
  if (contamination) contamination->validate();
}

SamplePath<double> generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("generate: n must be >= 1");
  spec.validate();
  Rng rng(Rng::derive(seed, streams::kBasePath));
  SamplePath<double> path;
  path.values.reserve(n);
  path.origin = spec.name();
  path.seed = seed;

  switch (spec.kind) {
    case ProcessSpec::Kind::kIid: {
      for (std::size_t i = 0; i < n; ++i) path.values.push_back(spec.iid.sample(rng));
      break;
    }
    case ProcessSpec::Kind::kNormalDrift: {
      const double c = spec.clip_half_width;
      for (std::size_t i = 1; i <= n; ++i) {
        double a_i = spec.drift_limit + spec.drift_amplitude * rate_value(spec.drift_rate, i);
        double raw = a_i + rng.gaussian();
        double unit = clip01((raw + c) / (2.0 * c));
        path.values.push_back(spec.ground.lo + (spec.ground.hi - spec.ground.lo) * unit);
      }
      break;
    }
    case ProcessSpec::Kind::kShrinkingContamination: {
      for (std::size_t i = 1; i <= n; ++i) {
        double eps_i = std::min(1.0, spec.eps0 * rate_value(spec.eps_rate, i));
        bool contaminated = rng.next_double() < eps_i;
        path.values.push_back(contaminated ? spec.contaminant.sample(rng)
                                           : spec.base.sample(rng));
      }
      break;
    }
    case ProcessSpec::Kind::kMarkovChain: {
      std::vector<double> pi = stationary_distribution(spec.chain.transition);
      std::size_t s = pi.size();
      std::size_t state = 0;
      {
        double u = rng.next_double();
        double cum = 0.0;
        state = s - 1;
        for (std::size_t j = 0; j < s; ++j) {
          cum += pi[j];
          if (u < cum) {
            state = j;
            break;
          }
        }
      }
      path.values.push_back(spec.chain.emissions[state]);
      for (std::size_t i = 1; i < n; ++i) {
        double u = rng.next_double();
        double cum = 0.0;
        std::size_t next = s - 1;
        for (std::size_t j = 0; j < s; ++j) {
          cum += spec.chain.transition[state][j];
          if (u < cum) {
            next = j;
            break;
          }
        }
        state = next;
        path.values.push_back(spec.chain.emissions[state]);
      }
      break;
    }
    case ProcessSpec::Kind::kAr1Transformed: {
      const double phi = spec.phi;
      const double stat_scale = std::sqrt(1.0 - phi * phi);
      double x = rng.gaussian() / stat_scale;
      for (std::size_t i = 0; i < n; ++i) {
        double unit = normal_cdf(x * stat_scale);
        path.values.push_back(spec.ground.lo + (spec.ground.hi - spec.ground.lo) * unit);
        x = phi * x + rng.gaussian();
      }
      break;
    }
  }

  if (spec.contamination) {
    path = contaminate(path, *spec.contamination, spec.ground,
                       Rng::derive(seed, streams::kContamination));
    path.origin = spec.name() + "+contaminated";
    path.seed = seed;
  }
  return path;
}

SamplePath<double> contaminate(const SamplePath<double>& path,
                               const ContaminationSpec& spec,
                               const GroundInterval& ground, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  SamplePath<double> out = path;
  const std::size_t n = path.values.size();
  Distribution1D target = spec.shift_target ? *spec.shift_target
                                            : Distribution1D::point_mass(ground.hi);
  switch (spec.mode) {
    case ContaminationSpec::Mode::kGrossError: {
      std::size_t m = static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(n)));
      if (m == 0) return out;
      // partial Fisher-Yates for m distinct positions
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t t = 0; t < m; ++t) {
        std::size_t j = t + static_cast<std::size_t>(rng.below(n - t));
        std::swap(idx[t], idx[j]);
      }
      for (std::size_t t = 0; t < m; ++t) out.values[idx[t]] = target.sample(rng);
      break;
    }
    case ContaminationSpec::Mode::kRounding: {
      for (double& v : out.values) {
        v += rng.uniform(-spec.magnitude, spec.magnitude);
        v = std::clamp(v, ground.lo, ground.hi);
      }
      break;
    }
    case ContaminationSpec::Mode::kDistributionShift: {
      for (double& v : out.values)
        if (rng.next_double() < spec.fraction) v = target.sample(rng);
      break;
    }
  }
  return out;
}

namespace {

MarginalLaw base_marginal(const ProcessSpec& spec, std::size_t i, std::size_t resolution) {
  MarginalLaw law;
  switch (spec.kind) {
    case ProcessSpec::Kind::kIid:
      law.measure = spec.iid.as_measure(resolution);
      law.exact = spec.iid.exact();
      break;
    case ProcessSpec::Kind::kNormalDrift: {
      double a_i = spec.drift_limit + spec.drift_amplitude * rate_value(spec.drift_rate, i);
      law.measure = clipped_normal_measure(a_i, spec.clip_half_width, spec.ground.lo,
                                           spec.ground.hi, resolution);
      law.exact = false;
      break;
    }
    case ProcessSpec::Kind::kShrinkingContamination: {
      double eps_i = std::min(1.0, spec.eps0 * rate_value(spec.eps_rate, i));
      law.measure = mixture<double>(
          {spec.base.as_measure(resolution), spec.contaminant.as_measure(resolution)},
          {1.0 - eps_i, eps_i});
      law.exact = spec.base.exact() && spec.contaminant.exact();
      break;
    }
    case ProcessSpec::Kind::kMarkovChain: {
      std::vector<double> pi = stationary_distribution(spec.chain.transition);
      law.measure = DiscreteMeasure<double>(spec.chain.emissions, pi);
      law.exact = true;
      break;
    }
    case ProcessSpec::Kind::kAr1Transformed: {
      law.measure = Distribution1D::uniform(spec.ground.lo, spec.ground.hi)
                        .as_measure(resolution);
      law.exact = false;
      break;
    }
  }
  law.resolution = law.exact ? 0 : resolution;
  return law;
}

MarginalLaw apply_contamination_to_law(MarginalLaw law, const ContaminationSpec& cs,
                                       const GroundInterval& ground, std::size_t n,
                                       std::size_t resolution) {
  Distribution1D target =
      cs.shift_target ? *cs.shift_target : Distribution1D::point_mass(ground.hi);
  switch (cs.mode) {
    case ContaminationSpec::Mode::kGrossError: {
      double m_f = std::floor(cs.fraction * static_cast<double>(n)) / static_cast<double>(n);
      if (m_f <= 0.0) return law;
      law.measure = mixture<double>({law.measure, target.as_measure(resolution)},
                                    {1.0 - m_f, m_f});
      law.exact = law.exact && target.exact();
      break;
    }
    case ContaminationSpec::Mode::kDistributionShift: {
      if (cs.fraction <= 0.0) return law;
      law.measure = mixture<double>({law.measure, target.as_measure(resolution)},
                                    {1.0 - cs.fraction, cs.fraction});
      law.exact = law.exact && target.exact();
      break;
    }
    case ContaminationSpec::Mode::kRounding: {
      if (cs.magnitude <= 0.0) return law;
      law.measure = apply_rounding_to_measure(law.measure, cs.magnitude, ground.lo,
                                              ground.hi, std::max<std::size_t>(resolution, 16));
      law.exact = false;
      break;
    }
  }
  if (!law.exact && law.resolution == 0) law.resolution = resolution;
  return law;
}

}  // namespace

MarginalLaw marginal_law(const ProcessSpec& spec, std::size_t i, std::size_t n,
                         std::size_t resolution) {
  if (i < 1 || i > n) throw DomainError("marginal_law: index out of range");
  spec.validate();
  MarginalLaw law = base_marginal(spec, i, resolution);
  if (spec.contamination)
    law = apply_contamination_to_law(std::move(law), *spec.contamination, spec.ground, n,
                                     resolution);
  return law;
}

MarginalLaw mixture_marginal_law(const ProcessSpec& spec, std::size_t n,
                                 std::size_t resolution) {
  spec.validate();
  const bool index_dependent = spec.kind == ProcessSpec::Kind::kNormalDrift ||
                               spec.kind == ProcessSpec::Kind::kShrinkingContamination;
  if (!index_dependent) return marginal_law(spec, 1, n, resolution);

  // Running mixture: after step i the accumulator holds (1/i) sum_{j<=i} law_j.
  MarginalLaw first = marginal_law(spec, 1, n, resolution);
  DiscreteMeasure<double> acc = first.measure;
  bool exact = first.exact;
  for (std::size_t i = 2; i <= n; ++i) {
    MarginalLaw law = marginal_law(spec, i, n, resolution);
    exact = exact && law.exact;
    const double di = static_cast<double>(i);
    acc = mixture<double>({acc, law.measure}, {(di - 1.0) / di, 1.0 / di});
  }
  MarginalLaw out;
  out.measure = std::move(acc);
  out.exact = exact;
  out.resolution = exact ? 0 : resolution;
  return out;
}

MarginalLaw limit_law(const ProcessSpec& spec, std::size_t resolution) {
  spec.validate();
  MarginalLaw law;
  switch (spec.kind) {
    case ProcessSpec::Kind::kIid:
      law.measure = spec.iid.as_measure(resolution);
      law.exact = spec.iid.exact();
      break;
    case ProcessSpec::Kind::kNormalDrift:
      law.measure = clipped_normal_measure(spec.drift_limit, spec.clip_half_width,
                                           spec.ground.lo, spec.ground.hi, resolution);
      law.exact = false;
      break;
    case ProcessSpec::Kind::kShrinkingContamination:
      law.measure = spec.base.as_measure(resolution);
      law.exact = spec.base.exact();
      break;
    case ProcessSpec::Kind::kMarkovChain: {
      std::vector<double> pi = stationary_distribution(spec.chain.transition);
      law.measure = DiscreteMeasure<double>(spec.chain.emissions, pi);
      law.exact = true;
      break;
    }
    case ProcessSpec::Kind::kAr1Transformed:
      law.measure =
          Distribution1D::uniform(spec.ground.lo, spec.ground.hi).as_measure(resolution);
      law.exact = false;
      break;
  }
  law.resolution = law.exact ? 0 : resolution;
  return law;
}

VaradarajanTable varadarajan_diagnostic(const ProcessSpec& spec,
                                        const DiscreteMeasure<double>& target,
                                        const std::vector<std::size_t>& n_grid,
                                        std::size_t reps, std::uint64_t seed,
                                        std::size_t compress_atoms, unsigned threads) {
  spec.validate();
  if (reps < 1) throw DomainError("varadarajan_diagnostic: reps must be >= 1");
  MetricSpace<double> space = spec.ground.space();
  VaradarajanTable table;
  table.reps = reps;
  table.seed = seed;
  table.compress_atoms = compress_atoms;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    std::vector<double> dists(reps, 0.0);
    std::uint64_t n_seed = Rng::derive(Rng::derive(seed, streams::kDiagnostic), n);
    parallel_for(
        reps,
        [&](std::size_t r) {
          SamplePath<double> path = generate(spec, n, Rng::derive(n_seed, r));
          DiscreteMeasure<double> emp =
              compress_measure(empirical_measure(path), compress_atoms);
          dists[r] = bl_value(emp, target, space);
        },
        threads);
    VaradarajanRow row;
    row.n = n;
    row.median_bl = median_of(dists);
    row.q25 = quantile_of(dists, 0.25);
    row.q75 = quantile_of(dists, 0.75);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace robustboot
