#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "robustboot/measure.hpp"
#include "robustboot/rng.hpp"

using namespace robustboot;

TEST_CASE("rng determinism and substreams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng s1 = Rng(42).substream(1);
  Rng s2 = Rng(42).substream(2);
  int equal = 0;
  for (int i = 0; i < 64; ++i)
    if (s1.next_u64() == s2.next_u64()) ++equal;
  CHECK(equal == 0);

  // pinned first outputs, guarding cross-build stability of every seed-derived
  // artifact in the repo
  Rng g(0);
  CHECK(g.next_u64() == 7390020580525870134ull);
  Rng h(20260809);
  CHECK(h.next_u64() == 13813866889566884699ull);
}

TEST_CASE("rng uniform ranges and moments") {
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::fabs(sum / 20000.0 - 0.5) < 0.01);

  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);

  double gsum = 0.0, gsq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double z = rng.gaussian();
    gsum += z;
    gsq += z * z;
  }
  CHECK(std::fabs(gsum / 20000.0) < 0.03);
  CHECK(std::fabs(gsq / 20000.0 - 1.0) < 0.05);
}

TEST_CASE("discrete measure canonicalization") {
  DiscreteMeasure<double> m({0.5, 0.1, 0.5}, {0.25, 0.5, 0.25});
  CHECK(m.size() == 2);
  CHECK(m.support()[0] == doctest::Approx(0.1));
  CHECK(m.weights()[0] == doctest::Approx(0.5));
  CHECK(m.weights()[1] == doctest::Approx(0.5));  // merged duplicates

  CHECK_THROWS_AS(DiscreteMeasure<double>({0.1}, {0.5}), DomainError);
  CHECK_THROWS_AS(DiscreteMeasure<double>({0.1, 0.2}, {0.6}), DomainError);
  CHECK_THROWS_AS(DiscreteMeasure<double>({0.1}, {-0.2}), DomainError);
}

TEST_CASE("empirical measure examples") {
  SamplePath<double> single{{0.5}, "test", 0};
  DiscreteMeasure<double> d = empirical_measure(single);
  CHECK(d.size() == 1);
  CHECK(d.weights()[0] == doctest::Approx(1.0));

  SamplePath<double> alternating{{0.0, 1.0, 0.0, 1.0}, "test", 0};
  DiscreteMeasure<double> e = empirical_measure(alternating);
  CHECK(e.size() == 2);
  CHECK(e.weights()[0] == doctest::Approx(0.5));
  CHECK(e.weights()[1] == doctest::Approx(0.5));

  SamplePath<double> empty;
  CHECK_THROWS_AS(empirical_measure(empty), DomainError);
}

TEST_CASE("empirical weights are multiplicities over n at a fixed seed") {
  Rng rng(99);
  std::vector<double> values;
  for (int i = 0; i < 100; ++i)
    values.push_back(static_cast<double>(rng.below(10)) / 10.0);  // ties guaranteed
  DiscreteMeasure<double> emp = empirical_measure(values);
  for (std::size_t i = 0; i < emp.size(); ++i) {
    std::size_t count = 0;
    for (double v : values)
      if (element_equal(v, emp.support()[i])) ++count;
    CHECK(emp.weights()[i] == doctest::Approx(static_cast<double>(count) / 100.0).epsilon(1e-12));
  }
}

TEST_CASE("empirical measure is permutation invariant") {
  Rng rng(3);
  std::vector<double> values;
  for (int i = 0; i < 50; ++i) values.push_back(rng.next_double());
  std::vector<double> shuffled = values;
  for (std::size_t i = shuffled.size(); i-- > 1;)
    std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
  CHECK(empirical_measure(values) == empirical_measure(shuffled));
}

TEST_CASE("mixture examples and oracle") {
  auto d0 = DiscreteMeasure<double>::dirac(0.0);
  auto d1 = DiscreteMeasure<double>::dirac(1.0);
  CHECK(mixture<double>({d0}, {1.0}) == d0);

  auto half = mixture<double>({d0, d1}, {0.5, 0.5});
  CHECK(half.size() == 2);
  CHECK(half.weights()[0] == doctest::Approx(0.5));

  CHECK_THROWS_AS(mixture<double>({d0, d1}, {0.6, 0.6}), DomainError);

  // brute-force accumulation oracle on three random two-point measures
  Rng rng(11);
  std::vector<DiscreteMeasure<double>> parts;
  for (int i = 0; i < 3; ++i) {
    double w = 0.2 + 0.6 * rng.next_double();
    parts.push_back(DiscreteMeasure<double>({rng.next_double(), 1.0 + rng.next_double()},
                                            {w, 1.0 - w}));
  }
  std::vector<double> coeffs = {0.2, 0.5, 0.3};
  auto mix = mixture<double>(parts, coeffs);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    double expected = 0.0;
    for (std::size_t pi = 0; pi < parts.size(); ++pi)
      for (std::size_t j = 0; j < parts[pi].size(); ++j)
        if (element_equal(parts[pi].support()[j], mix.support()[i]))
          expected += coeffs[pi] * parts[pi].weights()[j];
    CHECK(mix.weights()[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("product measure") {
  auto d0 = DiscreteMeasure<double>::dirac(0.0);
  auto d1 = DiscreteMeasure<double>::dirac(1.0);
  auto prod = product_measure<double>({d0, d1});
  CHECK(prod.size() == 1);
  CHECK(prod.support()[0] == std::vector<double>{0.0, 1.0});

  auto u = DiscreteMeasure<double>({0.0, 1.0}, {0.5, 0.5});
  auto uu = product_measure<double>({u, u});
  CHECK(uu.size() == 4);
  for (double w : uu.weights()) CHECK(w == doctest::Approx(0.25));

  // mass sums to one on random factors
  Rng rng(5);
  std::vector<DiscreteMeasure<double>> factors;
  for (int i = 0; i < 3; ++i) factors.push_back(oracles::random_measure(rng, 4));
  auto p3 = product_measure<double>(factors);
  double total = 0.0;
  for (double w : p3.weights()) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // capacity guards
  auto big = DiscreteMeasure<double>::uniform_on({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  CHECK_THROWS_AS(product_measure<double>({big}), CapacityError);
  CHECK_THROWS_AS(product_measure<double>({u, u, u, u, u}), CapacityError);
}

TEST_CASE("dn distance examples") {
  MetricSpace<double> line = interval_space(0.0, 2.0);

  std::vector<double> a = {0.3, 0.7, 0.1, 0.9};
  CHECK(dn_distance(a, a, line) == doctest::Approx(0.0));

  // distances (1,0,0,0): the count drops to zero just above 0, but 1/4 is
  // where the fraction bound first allows one exceedance
  std::vector<double> x = {0.0, 0.0, 0.0, 0.0};
  std::vector<double> y = {1.0, 0.0, 0.0, 0.0};
  CHECK(dn_distance(x, y, line) == doctest::Approx(0.25));
  CHECK(dn_distance(x, y, line) ==
        doctest::Approx(oracles::dn_scan_oracle(x, y, line)).epsilon(1e-5));

  // distances (0.1, 0.1): infimum not attained, equals 0.1
  std::vector<double> u = {0.0, 0.0};
  std::vector<double> v = {0.1, 0.1};
  CHECK(dn_distance(u, v, line) == doctest::Approx(0.1));
  CHECK(dn_distance(u, v, line) ==
        doctest::Approx(oracles::dn_scan_oracle(u, v, line)).epsilon(1e-5));

  CHECK_THROWS_AS(dn_distance(u, x, line), DomainError);
}

TEST_CASE("dn metric axioms and domination on sampled triples") {
  MetricSpace<double> line = interval_space(0.0, 1.0);
  MetricSpace<std::vector<double>> dn_space = product_space_dn(line, 5);
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(5), b(5), c(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = rng.next_double();
      b[i] = rng.next_double();
      c[i] = rng.next_double();
    }
    double dab = dn_space.dist(a, b);
    double dba = dn_space.dist(b, a);
    double dac = dn_space.dist(a, c);
    double dcb = dn_space.dist(c, b);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
    CHECK(dab <= dac + dcb + 1e-12);
    CHECK(dab <= 1.0 + 1e-12);
    double dmax = 0.0;
    for (int i = 0; i < 5; ++i) dmax = std::max(dmax, std::fabs(a[i] - b[i]));
    CHECK(dab <= dmax + 1e-12);
  }
}

TEST_CASE("product space dn reduces correctly at n = 1") {
  MetricSpace<double> line = interval_space(0.0, 1.0);
  MetricSpace<std::vector<double>> dn1 = product_space_dn(line, 1);
  // ground distance 0.3: feasible once eps >= 0.3 (count drops to zero)
  CHECK(dn1.dist({0.2}, {0.5}) == doctest::Approx(0.3));
  CHECK(dn1.dist({0.2}, {0.5}) ==
        doctest::Approx(oracles::dn_scan_oracle<double>({0.2}, {0.5}, line)).epsilon(1e-5));
  CHECK(*dn1.diameter_bound == doctest::Approx(1.0));
}

TEST_CASE("compress_measure preserves mass and mean") {
  Rng rng(23);
  std::vector<double> xs(1000);
  for (double& x : xs) x = rng.next_double();
  DiscreteMeasure<double> emp = empirical_measure(xs);
  DiscreteMeasure<double> small = compress_measure(emp, 50);
  CHECK(small.size() <= 50);
  double mean_full = 0.0, mean_small = 0.0;
  for (std::size_t i = 0; i < emp.size(); ++i) mean_full += emp.weights()[i] * emp.support()[i];
  for (std::size_t i = 0; i < small.size(); ++i)
    mean_small += small.weights()[i] * small.support()[i];
  CHECK(mean_full == doctest::Approx(mean_small).epsilon(1e-9));
}
