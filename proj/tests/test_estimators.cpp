#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "robustboot/bl.hpp"
#include "robustboot/estimators.hpp"
#include "robustboot/rng.hpp"

using namespace robustboot;

TEST_CASE("mean and median basics") {
  auto dc = DiscreteMeasure<double>::dirac(0.37);
  CHECK(EstimatorOperator::mean().evaluate(dc) == doctest::Approx(0.37));
  CHECK(EstimatorOperator::median().evaluate(dc) == doctest::Approx(0.37));

  // midpoint rule at the flat spot
  auto half = DiscreteMeasure<double>({0.0, 1.0}, {0.5, 0.5});
  CHECK(EstimatorOperator::median().evaluate(half) == doctest::Approx(0.5));

  auto skew = DiscreteMeasure<double>({0.0, 1.0}, {0.4, 0.6});
  CHECK(EstimatorOperator::median().evaluate(skew) == doctest::Approx(1.0));
}

TEST_CASE("trimmed mean with boundary-atom splitting") {
  auto four = DiscreteMeasure<double>::uniform_on({0.0, 1.0, 2.0, 3.0});
  auto trimmed = EstimatorOperator::trimmed_mean(0.25);
  CHECK(trimmed.evaluate(four) == doctest::Approx(1.5));

  // beta = 0 reduces to the mean
  auto m = DiscreteMeasure<double>({0.1, 0.9}, {0.25, 0.75});
  CHECK(EstimatorOperator::trimmed_mean(0.0).evaluate(m) ==
        doctest::Approx(EstimatorOperator::mean().evaluate(m)));

  CHECK_THROWS_AS(EstimatorOperator::trimmed_mean(0.5), DomainError);
}

TEST_CASE("huber root against the grid-scan oracle") {
  auto m = DiscreteMeasure<double>({0.0, 0.9}, {2.0 / 3.0, 1.0 / 3.0});
  double got = EstimatorOperator::huber(0.5).evaluate(m);
  double expect = oracles::huber_root_scan({0.0, 0.9}, {2.0 / 3.0, 1.0 / 3.0}, 0.5, 0.0, 0.9);
  CHECK(got == doctest::Approx(expect).epsilon(1e-8));
  CHECK(got == doctest::Approx(0.25).epsilon(1e-8));  // (2/3) theta = 1/6
}

TEST_CASE("huber residual vanishes at the root") {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    auto m = oracles::random_measure(rng, 8);
    double k = 0.1 + rng.next_double();
    double theta = EstimatorOperator::huber(k).evaluate(m);
    double score = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
      score += m.weights()[i] * std::clamp(m.support()[i] - theta, -k, k);
    CHECK(std::fabs(score) <= 1e-9);
  }
}

TEST_CASE("huber midpoint rule on a flat zero stretch") {
  // two distant atoms with equal mass: every theta in [k, 10-k] is a root
  auto m = DiscreteMeasure<double>({0.0, 10.0}, {0.5, 0.5});
  double theta = EstimatorOperator::huber(1.0).evaluate(m);
  CHECK(theta == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("operator evaluation equals direct sample statistics") {
  Rng rng(2025);
  for (int t = 0; t < 100; ++t) {
    std::size_t n = 3 + rng.below(40);
    std::vector<double> values(n);
    for (double& v : values) v = rng.next_double();
    SamplePath<double> path{values, "t", 0};

    CHECK(EstimatorOperator::mean().evaluate(path) ==
          doctest::Approx(oracles::sample_mean(values)).epsilon(1e-12));
    CHECK(EstimatorOperator::median().evaluate(path) ==
          doctest::Approx(oracles::sample_median(values)).epsilon(1e-12));
    CHECK(EstimatorOperator::trimmed_mean(0.2).evaluate(path) ==
          doctest::Approx(oracles::sample_trimmed_mean(values, 0.2)).epsilon(1e-12));
  }
}

TEST_CASE("permutation invariance is exact") {
  Rng rng(77);
  std::vector<double> values(25);
  for (double& v : values) v = rng.next_double();
  std::vector<double> shuffled = values;
  for (std::size_t i = shuffled.size(); i-- > 1;)
    std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
  SamplePath<double> a{values, "t", 0}, b{shuffled, "t", 0};
  for (const char* name : {"mean", "median", "trimmed_mean", "huber"}) {
    EstimatorOperator op = make_estimator(name);
    CHECK(op.evaluate(a) == op.evaluate(b));
  }
}

TEST_CASE("estimates stay inside the support hull") {
  Rng rng(88);
  for (int t = 0; t < 25; ++t) {
    auto m = oracles::random_measure(rng, 10);
    double lo = m.support().front(), hi = m.support().back();
    for (const char* name : {"mean", "median", "trimmed_mean", "huber"}) {
      double v = make_estimator(name).evaluate(m);
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
  }
}

TEST_CASE("mean is 2-Lipschitz in bl on the unit interval") {
  // the identity has Lipschitz 1 and sup norm 1, so |EP - EQ| <= 2 bl(P, Q)
  Rng rng(99);
  MetricSpace<double> space = interval_space(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    auto p = oracles::random_measure(rng, 6);
    auto q = oracles::random_measure(rng, 6);
    double gap = std::fabs(EstimatorOperator::mean().evaluate(p) -
                           EstimatorOperator::mean().evaluate(q));
    CHECK(gap <= 2.0 * bl_value(p, q, space) + 1e-7);
  }
}

TEST_CASE("estimator registry") {
  CHECK(make_estimator("huber", {{"k", 0.5}}).name() == "huber");
  CHECK_THROWS_WITH_AS(make_estimator("winsorized"),
                       doctest::Contains("registry"), DomainError);
  auto names = estimator_names();
  CHECK(names.size() >= 4);

  register_estimator("range_mid", [](const std::map<std::string, double>&) {
    return EstimatorOperator("range_mid", [](const DiscreteMeasure<double>& m) {
      return 0.5 * (m.support().front() + m.support().back());
    });
  });
  CHECK(make_estimator("range_mid").evaluate(DiscreteMeasure<double>::uniform_on({0.0, 1.0})) ==
        doctest::Approx(0.5));
}

TEST_CASE("modulus probe") {
  MetricSpace<double> space = interval_space(0.0, 1.0);
  auto center = DiscreteMeasure<double>::uniform_on({0.1, 0.3, 0.5, 0.7, 0.9});

  auto table = modulus_probe(EstimatorOperator::mean(), center, space,
                             {0.0, 0.02, 0.05, 0.1}, 60, 11);
  REQUIRE(table.size() == 4);
  CHECK(table[0].modulus == doctest::Approx(0.0));
  for (const auto& row : table) CHECK(row.accepted > 0);

  // mean: modulus grows at most linearly; calibrate the constant on the
  // smallest radius and check the larger ones stay within it
  double c_fit = table[1].modulus / table[1].radius;
  for (std::size_t i = 2; i < table.size(); ++i)
    CHECK(table[i].modulus <= 3.0 * std::max(1.0, c_fit) * table[i].radius + 1e-9);

  // median at a gapped center: tiny weight noise flips the median across the
  // gap, a non-uniform-continuity exhibit
  auto gapped = DiscreteMeasure<double>({0.0, 1.0}, {0.5 - 0.01, 0.5 + 0.01});
  auto jump = modulus_probe(EstimatorOperator::median(), gapped, space, {0.05}, 80, 21);
  CHECK(jump[0].modulus > 0.4);
}
