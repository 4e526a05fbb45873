#include "robustboot/robustness.hpp"

#include <chrono>
#include <cmath>

#include "robustboot/parallel.hpp"
#include "robustboot/version.hpp"

namespace robustboot {

void ExperimentConfig::validate() const {
  process_p.validate();
  process_q.validate();
  if (process_p.kind != process_q.kind)
    throw DomainError("ExperimentConfig: the contaminated process must keep the "
                      "structural class of the ideal process");
  if (outer_reps < 2 || inner_reps < 2)
    throw DomainError("ExperimentConfig: outer_reps and inner_reps must be >= 2");
  if (n_grid.empty()) throw DomainError("ExperimentConfig: empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw DomainError("ExperimentConfig: n grid must be ascending");
  if (outer_reps > max_outer_for_lp)
    throw CapacityError("ExperimentConfig: outer_reps exceeds the LP cap " +
                        std::to_string(max_outer_for_lp));
  make_estimator(estimator_name, estimator_params);  // throws on unknown name
}

CoupledLaws coupled_laws(const ProcessSpec& p, const ProcessSpec& q,
                         const BootstrapScheme& scheme, const EstimatorOperator& estimator,
                         std::size_t n, std::size_t outer_reps, std::size_t inner_reps,
                         std::uint64_t seed, std::size_t bin_max_atoms, unsigned threads) {
  CoupledLaws laws;
  laws.p_laws.resize(outer_reps);
  laws.q_laws.resize(outer_reps);
  std::uint64_t outer_base = Rng::derive(seed, streams::kOuterPath);
  std::uint64_t inner_base = Rng::derive(seed, streams::kInnerBoot);
  parallel_for(
      outer_reps,
      [&](std::size_t k) {
        std::uint64_t path_seed = Rng::derive(outer_base, k);
        std::uint64_t boot_seed = Rng::derive(inner_base, k);
        SamplePath<double> path_p = generate(p, n, path_seed);
        SamplePath<double> path_q = generate(q, n, path_seed);
        // Inner resampling uses one stream per replicate pair: common random
        // numbers couple the two arms.
        laws.p_laws[k] = compress_measure(
            bootstrap_law_of_estimator(path_p, scheme, estimator, inner_reps, boot_seed, 1),
            bin_max_atoms);
        laws.q_laws[k] = compress_measure(
            bootstrap_law_of_estimator(path_q, scheme, estimator, inner_reps, boot_seed, 1),
            bin_max_atoms);
      },
      threads);
  return laws;
}

namespace {

LawOfLaws assemble_outer(const std::vector<DiscreteMeasure<double>>& inner_laws) {
  const double w = 1.0 / static_cast<double>(inner_laws.size());
  return LawOfLaws(inner_laws, std::vector<double>(inner_laws.size(), w));
}

}  // namespace

LawOfLaws law_of_laws(const ProcessSpec& spec, const BootstrapScheme& scheme,
                      const EstimatorOperator& estimator, std::size_t n,
                      std::size_t outer_reps, std::size_t inner_reps, std::uint64_t seed,
                      std::size_t bin_max_atoms, unsigned threads) {
  if (outer_reps < 1) throw DomainError("law_of_laws: outer_reps must be >= 1");
  CoupledLaws laws = coupled_laws(spec, spec, scheme, estimator, n, outer_reps, inner_reps,
                                  seed, bin_max_atoms, threads);
  return assemble_outer(laws.p_laws);
}

NestedDistance nested_bl_full(const LawOfLaws& lp, const LawOfLaws& lq,
                              const MetricSpace<double>& h_space, std::size_t max_outer,
                              unsigned threads) {
  if (lp.size() > max_outer || lq.size() > max_outer)
    throw CapacityError("nested_bl: outer support exceeds cap " +
                        std::to_string(max_outer));
  NestedDistance out;
  if (lp == lq) {
    const std::size_t k = lp.size();
    out.p_weights = lp.weights();
    out.q_weights = lq.weights();
    out.dist.assign(k, std::vector<double>(k, 0.0));
    return out;
  }
  UnionSupport<DiscreteMeasure<double>> u = union_support(lp, lq);
  const std::size_t k = u.atoms.size();
  out.p_weights = u.p_weights;
  out.q_weights = u.q_weights;
  out.dist.assign(k, std::vector<double>(k, 0.0));

  // The ground distances of the outer LP: all union pairs, since the
  // Lipschitz constraints need within-arm distances too.
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  jobs.reserve(k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) jobs.emplace_back(i, j);
  parallel_for(
      jobs.size(),
      [&](std::size_t t) {
        auto [i, j] = jobs[t];
        double d = bl_value(u.atoms[i], u.atoms[j], h_space);
        out.dist[i][j] = d;
        out.dist[j][i] = d;
      },
      threads);

  std::vector<double> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = u.p_weights[i] - u.q_weights[i];
  std::vector<detail::BlPair> pairs;
  pairs.reserve(jobs.size());
  for (auto [i, j] : jobs)
    pairs.push_back({static_cast<int>(i), static_cast<int>(j), out.dist[i][j]});
  BlSolution sol = detail::bl_simplex_core(c, pairs, 2000000);
  out.value = sol.value;
  out.lp_iterations = sol.iterations;
  return out;
}

double nested_bl_distance(const LawOfLaws& lp, const LawOfLaws& lq,
                          const MetricSpace<double>& h_space, std::size_t max_outer,
                          unsigned threads) {
  return nested_bl_full(lp, lq, h_space, max_outer, threads).value;
}

CoupledExpectation coupled_expectation(const CoupledLaws& laws,
                                       const MetricSpace<double>& h_space,
                                       unsigned threads) {
  if (laws.p_laws.size() != laws.q_laws.size() || laws.p_laws.empty())
    throw DomainError("coupled_expectation: arm size mismatch");
  CoupledExpectation out;
  out.per_rep.resize(laws.p_laws.size(), 0.0);
  parallel_for(
      laws.p_laws.size(),
      [&](std::size_t kidx) {
        out.per_rep[kidx] = bl_value(laws.p_laws[kidx], laws.q_laws[kidx], h_space);
      },
      threads);
  double acc = 0.0;
  for (double v : out.per_rep) acc += v;
  out.value = acc / static_cast<double>(out.per_rep.size());
  return out;
}

InputProxy input_distance_proxy(const ProcessSpec& p, const ProcessSpec& q, std::size_t n,
                                std::size_t resolution) {
  MarginalLaw mp = mixture_marginal_law(p, n, resolution);
  MarginalLaw mq = mixture_marginal_law(q, n, resolution);
  InputProxy proxy;
  proxy.exact = mp.exact && mq.exact;
  proxy.resolution = proxy.exact ? 0 : resolution;
  MetricSpace<double> space = p.ground.space();
  BlOptions opt;
  opt.max_union_support = 4096;  // two discretized marginals can exceed 2000
  opt.want_certificate = false;
  proxy.value = bl_distance(mp.measure, mq.measure, space, opt).value;
  return proxy;
}

namespace {

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Multinomial resample of outer weights: draws `reps` atoms from `weights`
// and returns the resampled weight vector on the same support.
std::vector<double> resample_weights(const std::vector<double>& weights, std::size_t reps,
                                     Rng& rng) {
  std::vector<double> out(weights.size(), 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    double u = rng.next_double();
    double cum = 0.0;
    std::size_t pick = weights.size() - 1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      cum += weights[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    out[pick] += 1.0 / static_cast<double>(reps);
  }
  return out;
}

double nested_from_weights(const NestedDistance& nd, const std::vector<double>& pw,
                           const std::vector<double>& qw) {
  const std::size_t k = nd.dist.size();
  std::vector<double> c(k);
  bool all_zero = true;
  for (std::size_t i = 0; i < k; ++i) {
    c[i] = pw[i] - qw[i];
    if (std::fabs(c[i]) > 1e-15) all_zero = false;
  }
  if (all_zero) return 0.0;
  std::vector<detail::BlPair> pairs;
  pairs.reserve(k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      pairs.push_back({static_cast<int>(i), static_cast<int>(j), nd.dist[i][j]});
  return detail::bl_simplex_core(c, pairs, 2000000).value;
}

}  // namespace

RobustnessReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  EstimatorOperator estimator = make_estimator(config.estimator_name, config.estimator_params);
  MetricSpace<double> h_space =
      interval_space(config.process_p.ground.lo, config.process_p.ground.hi);

  RobustnessReport report;
  report.config = config;
  report.version = kVersion;

  const bool want_nested = config.method != ExperimentConfig::Method::kCoupled;
  const bool want_coupled = config.method != ExperimentConfig::Method::kNested;

  for (std::size_t n : config.n_grid) {
    RobustnessRow row;
    row.n = n;
    auto t0 = std::chrono::steady_clock::now();
    try {
      InputProxy proxy =
          input_distance_proxy(config.process_p, config.process_q, n, config.proxy_resolution);
      row.input_proxy = proxy.value;
      row.proxy_exact = proxy.exact;
      row.proxy_resolution = proxy.resolution;

      std::uint64_t n_seed = Rng::derive(config.seed, n);
      CoupledLaws laws =
          coupled_laws(config.process_p, config.process_q, config.scheme, estimator, n,
                       config.outer_reps, config.inner_reps, n_seed, config.bin_max_atoms,
                       config.threads);

      Rng err_rng(Rng::derive(n_seed, streams::kErrorBar));

      if (want_coupled) {
        CoupledExpectation ce = coupled_expectation(laws, h_space, config.threads);
        row.coupled = ce.value;
        std::vector<double> boot(config.error_bar_resamples, 0.0);
        for (std::size_t s = 0; s < config.error_bar_resamples; ++s) {
          double acc = 0.0;
          for (std::size_t r = 0; r < ce.per_rep.size(); ++r)
            acc += ce.per_rep[err_rng.below(ce.per_rep.size())];
          boot[s] = acc / static_cast<double>(ce.per_rep.size());
        }
        row.err_coupled = 2.0 * stddev(boot);
      }

      if (want_nested) {
        LawOfLaws lp = assemble_outer(laws.p_laws);
        LawOfLaws lq = assemble_outer(laws.q_laws);
        NestedDistance nd =
            nested_bl_full(lp, lq, h_space, config.max_outer_for_lp, config.threads);
        row.nested = nd.value;
        std::vector<double> boot(config.error_bar_resamples, 0.0);
        parallel_for(
            config.error_bar_resamples,
            [&](std::size_t s) {
              Rng local(Rng::derive(Rng::derive(n_seed, streams::kErrorBar), 1000 + s));
              std::vector<double> pw =
                  resample_weights(nd.p_weights, config.outer_reps, local);
              std::vector<double> qw =
                  resample_weights(nd.q_weights, config.outer_reps, local);
              boot[s] = nested_from_weights(nd, pw, qw);
            },
            config.threads);
        row.err_nested = 2.0 * stddev(boot);
      }
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    row.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace robustboot
