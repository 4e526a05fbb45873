#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "oracles.hpp"
#include "robustboot/bl.hpp"
#include "robustboot/bootstrap.hpp"
#include "robustboot/processes.hpp"

using namespace robustboot;

TEST_CASE("block schedule examples") {
  BlockSchedule s1 = block_schedule(1);
  CHECK(s1.b == 1);
  CHECK(s1.ell == 1);

  BlockSchedule s16 = block_schedule(16, 0.25);
  CHECK(s16.b == 2);  // floor(2^(4 * 0.25))
  CHECK(s16.ell == 8);

  // dyadic constancy across [64, 128)
  CHECK(block_schedule(100).b == block_schedule(127).b);
  CHECK(block_schedule(64).b == block_schedule(100).b);

  CHECK_THROWS_AS(block_schedule(16, 0.0), DomainError);
  CHECK_THROWS_AS(block_schedule(16, 0.5), DomainError);
  CHECK_THROWS_AS(block_schedule(0, 0.25), DomainError);
}

TEST_CASE("block schedule growth") {
  std::size_t prev_b = 0;
  for (std::size_t q = 1; q <= 20; ++q) {
    BlockSchedule s = block_schedule(std::size_t{1} << q, 0.25);
    CHECK(s.b >= prev_b);
    CHECK(s.ell == (s.n + s.b - 1) / s.b);
    prev_b = s.b;
  }
  CHECK(prev_b >= 32);  // b -> infinity along powers of two
}

TEST_CASE("efron resample basics") {
  SamplePath<double> single{{0.7}, "t", 0};
  auto rs = efron_resample(single, 5, 42);
  REQUIRE(rs.values.size() == 5);
  for (double v : rs.values) CHECK(v == doctest::Approx(0.7));

  // reproducible index draws
  SamplePath<double> path{{0.0, 0.25, 0.5, 0.75}, "t", 0};
  CHECK(efron_indices(4, 16, 9) == efron_indices(4, 16, 9));
  CHECK(efron_indices(4, 16, 9) != efron_indices(4, 16, 10));

  // values come from the original sample
  auto star = efron_resample(path, 64, 3);
  std::set<double> allowed(path.values.begin(), path.values.end());
  for (double v : star.values) CHECK(allowed.count(v) == 1);
}

TEST_CASE("efron resample frequency matches the binomial band") {
  std::vector<double> values(100, 0.0);
  for (int i = 50; i < 100; ++i) values[i] = 1.0;
  SamplePath<double> path{values, "t", 0};
  auto star = efron_resample(path, 10000, 2026);
  double freq = 0.0;
  for (double v : star.values) freq += v;
  freq /= 10000.0;
  CHECK(std::fabs(freq - 0.5) < 0.02);  // 3 sigma of Bin(10^4, 1/2)/10^4 is 0.015
}

TEST_CASE("mbb wrap and truncation") {
  SamplePath<double> path{{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, "t", 0};
  const std::size_t n = path.values.size();

  // b = n: the resample is a rotation of the input
  BlockSchedule all{n, n, 1};
  auto rotated = mbb_resample(path, all, 11);
  REQUIRE(rotated.values.size() == n);
  std::size_t start = 0;
  while (start < n && rotated.values[0] != path.values[start]) ++start;
  REQUIRE(start < n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(rotated.values[i] == doctest::Approx(path.values[(start + i) % n]));

  // constant path stays constant
  SamplePath<double> flat{std::vector<double>(9, 0.5), "t", 0};
  auto flat_star = mbb_resample(flat, block_schedule(9), 5);
  for (double v : flat_star.values) CHECK(v == doctest::Approx(0.5));

  // wrong schedule
  CHECK_THROWS_AS(mbb_resample(path, BlockSchedule{5, 2, 3}, 1), DomainError);
}

TEST_CASE("circular blocks equal the doubled-path window") {
  // the multiset of values in each block equals the window read from
  // path-concatenated-with-itself
  SamplePath<double> path{{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}, "t", 0};
  const std::size_t n = path.values.size();
  std::vector<double> doubled = path.values;
  doubled.insert(doubled.end(), path.values.begin(), path.values.end());
  BlockSchedule sched = block_schedule(n, 0.25);  // b = 2
  std::vector<std::size_t> idx = mbb_indices(n, sched, 77);
  REQUIRE(idx.size() == n);
  for (std::size_t blk = 0; blk + sched.b <= idx.size(); blk += sched.b) {
    std::size_t start = idx[blk];
    for (std::size_t t = 0; t < sched.b; ++t)
      CHECK(path.values[idx[blk + t]] == doctest::Approx(doubled[start + t]));
  }
}

TEST_CASE("restricted starts never wrap") {
  const std::size_t n = 32;
  SamplePath<double> path{std::vector<double>(n), "t", 0};
  for (std::size_t i = 0; i < n; ++i) path.values[i] = static_cast<double>(i);
  BlockSchedule sched = block_schedule(n, 0.25);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<std::size_t> idx = mbb_indices(n, sched, seed, true);
    for (std::size_t blk = 0; blk + sched.b <= idx.size(); blk += sched.b)
      for (std::size_t t = 1; t < sched.b; ++t)
        CHECK(idx[blk + t] == idx[blk + t - 1] + 1);  // contiguous, no modulo jump
  }
}

TEST_CASE("mbb with unit blocks is distributionally efron") {
  // average the empirical laws of many resamples under both schemes and
  // compare in bl; the index draws couple
  SamplePath<double> path{{0.0, 0.3, 0.6, 1.0}, "t", 0};
  MetricSpace<double> space = interval_space(0.0, 1.0);
  const std::size_t reps = 2000;
  const std::size_t n = path.values.size();
  std::map<double, double> acc_e, acc_b;
  BlockSchedule unit{n, 1, n};
  for (std::size_t r = 0; r < reps; ++r) {
    auto e = efron_resample(path, n, Rng::derive(100, r));
    auto b = mbb_resample(path, unit, Rng::derive(200, r));
    for (double v : e.values) acc_e[v] += 1.0;
    for (double v : b.values) acc_b[v] += 1.0;
  }
  std::vector<double> xs, we, wb;
  for (auto& [x, w] : acc_e) {
    xs.push_back(x);
    we.push_back(w / static_cast<double>(reps * n));
  }
  std::vector<double> xb;
  for (auto& [x, w] : acc_b) {
    xb.push_back(x);
    wb.push_back(w / static_cast<double>(reps * n));
  }
  DiscreteMeasure<double> mean_e(xs, we), mean_b(xb, wb);
  CHECK(bl_value(mean_e, mean_b, space) <= 0.05);
}

TEST_CASE("resampled empirical approaches the path empirical as n grows") {
  ProcessSpec chain;
  chain.kind = ProcessSpec::Kind::kMarkovChain;
  chain.chain.transition = {{0.9, 0.1}, {0.1, 0.9}};
  chain.chain.emissions = {0.0, 1.0};
  MetricSpace<double> space = interval_space(0.0, 1.0);

  std::vector<double> medians;
  for (std::size_t q : {6, 10}) {
    std::size_t n = std::size_t{1} << q;
    SamplePath<double> path = generate(chain, n, 4711);
    DiscreteMeasure<double> emp = empirical_measure(path);
    BlockSchedule sched = block_schedule(n, 0.25);
    std::vector<double> d;
    for (std::size_t r = 0; r < 50; ++r) {
      auto star = mbb_resample(path, sched, Rng::derive(5000, r));
      d.push_back(bl_value(empirical_measure(star), emp, space));
    }
    std::sort(d.begin(), d.end());
    medians.push_back(d[d.size() / 2]);
  }
  CHECK(medians[1] < medians[0]);
}

TEST_CASE("bootstrap law of the estimator") {
  // constant path: any sane estimator returns the constant
  SamplePath<double> flat{std::vector<double>(20, 0.42), "t", 0};
  BootstrapScheme efron;
  auto law = bootstrap_law_of_estimator(flat, efron, EstimatorOperator::mean(), 50, 7);
  CHECK(law.size() == 1);
  CHECK(law.support()[0] == doctest::Approx(0.42));

  // fixed seeds reproduce the measure
  ProcessSpec spec;
  spec.kind = ProcessSpec::Kind::kIid;
  spec.iid = Distribution1D::uniform(0.0, 1.0);
  SamplePath<double> path = generate(spec, 100, 1);
  auto law1 = bootstrap_law_of_estimator(path, efron, EstimatorOperator::mean(), 300, 5);
  auto law2 = bootstrap_law_of_estimator(path, efron, EstimatorOperator::mean(), 300, 5);
  CHECK(law1 == law2);

  // classical bootstrap variance: sd of the mean's law ~ sample sd / sqrt(n)
  auto law3 = bootstrap_law_of_estimator(path, efron, EstimatorOperator::mean(), 2000, 9);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < law3.size(); ++i) {
    m1 += law3.weights()[i] * law3.support()[i];
    m2 += law3.weights()[i] * law3.support()[i] * law3.support()[i];
  }
  double law_sd = std::sqrt(std::max(0.0, m2 - m1 * m1));
  double sample_mean = 0.0, sample_sq = 0.0;
  for (double v : path.values) {
    sample_mean += v;
    sample_sq += v * v;
  }
  sample_mean /= 100.0;
  sample_sq = sample_sq / 100.0 - sample_mean * sample_mean;
  double expected_sd = std::sqrt(sample_sq) / 10.0;
  CHECK(law_sd == doctest::Approx(expected_sd).epsilon(0.25));
}

TEST_CASE("resample length is exactly n for random schedules") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 1 + rng.below(5000);
    double exponent = 0.05 + 0.4 * rng.next_double();
    BlockSchedule sched = block_schedule(n, exponent);
    SamplePath<double> path{std::vector<double>(n, 0.0), "t", 0};
    auto star = mbb_resample(path, sched, rng.next_u64());
    CHECK(star.values.size() == n);
  }
}
