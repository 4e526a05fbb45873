#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "robustboot/bl.hpp"
#include "robustboot/prohorov.hpp"

using namespace robustboot;

namespace {

MetricSpace<double> unit_line() { return interval_space(0.0, 1.0); }

void check_certificate(const BlSolution& sol, const DiscreteMeasure<double>& p,
                       const DiscreteMeasure<double>& q, const MetricSpace<double>& space) {
  auto u = union_support(p, q);
  const auto& f = sol.certificate.function_values;
  REQUIRE(f.size() == u.atoms.size());
  const double L = sol.certificate.lipschitz_part;
  const double M = sol.certificate.sup_part;
  CHECK(L + M <= 1.0 + 1e-9);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::fabs(f[i]) <= M + 1e-9);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j)
      CHECK(std::fabs(f[i] - f[j]) <= L * space.dist(u.atoms[i], u.atoms[j]) + 1e-9);
  double obj = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    obj += (u.p_weights[i] - u.q_weights[i]) * f[i];
  CHECK(obj == doctest::Approx(sol.certificate.objective).epsilon(1e-9));
  CHECK(sol.value == doctest::Approx(sol.certificate.objective).epsilon(1e-7));
}

}  // namespace

TEST_CASE("bl distance of identical measures is exactly zero") {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    auto m = oracles::random_measure(rng, 6);
    CHECK(bl_distance(m, m, unit_line()).value == 0.0);
  }
}

TEST_CASE("dirac pair closed form on both routes") {
  for (double t : {0.1, 0.5, 1.0}) {
    auto d0 = DiscreteMeasure<double>::dirac(0.0);
    auto dt = DiscreteMeasure<double>::dirac(t);
    MetricSpace<double> space = interval_space(0.0, 1.0);
    double expect = oracles::dirac_bl_closed_form(t);

    BlOptions simplex_opt;
    simplex_opt.method = BlMethod::kSimplex;
    BlSolution s = bl_distance(d0, dt, space, simplex_opt);
    CHECK(s.value == doctest::Approx(expect).epsilon(1e-9));
    check_certificate(s, d0, dt, space);

    BlOptions chain_opt;
    chain_opt.method = BlMethod::kChain;
    BlSolution c = bl_distance(d0, dt, space, chain_opt);
    CHECK(c.value == doctest::Approx(expect).epsilon(1e-8));
    check_certificate(c, d0, dt, space);
  }
}

TEST_CASE("two-atom vs dirac matches the grid oracle") {
  auto p = DiscreteMeasure<double>({0.0, 1.0}, {0.5, 0.5});
  auto q = DiscreteMeasure<double>::dirac(0.0);
  double got = bl_value(p, q, unit_line());
  double expect = oracles::bl_grid_oracle_measures(p, q, unit_line(), 1e-2);
  CHECK(got == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("simplex and chain routes agree on random line instances") {
  Rng rng(202);
  for (int t = 0; t < 40; ++t) {
    auto p = oracles::random_measure(rng, 12);
    auto q = oracles::random_measure(rng, 12);
    BlOptions simplex_opt;
    simplex_opt.method = BlMethod::kSimplex;
    BlOptions chain_opt;
    chain_opt.method = BlMethod::kChain;
    double vs = bl_distance(p, q, unit_line(), simplex_opt).value;
    double vc = bl_distance(p, q, unit_line(), chain_opt).value;
    CHECK(vs == doctest::Approx(vc).epsilon(1e-8));
  }
}

TEST_CASE("bl certificates are feasible and optimal on random instances") {
  Rng rng(303);
  for (int t = 0; t < 20; ++t) {
    auto p = oracles::random_measure(rng, 8);
    auto q = oracles::random_measure(rng, 8);
    BlSolution sol = bl_distance(p, q, unit_line());
    check_certificate(sol, p, q, unit_line());
    // flow-side witness matches by weak duality
    REQUIRE(sol.dual.has_value());
    CHECK(sol.dual->objective == doctest::Approx(sol.value).epsilon(1e-9));
  }
}

TEST_CASE("bl metric axioms on sampled triples") {
  Rng rng(404);
  for (int t = 0; t < 50; ++t) {
    auto p = oracles::random_measure(rng, 5);
    auto q = oracles::random_measure(rng, 5);
    auto r = oracles::random_measure(rng, 5);
    double pq = bl_value(p, q, unit_line());
    double qp = bl_value(q, p, unit_line());
    double pr = bl_value(p, r, unit_line());
    double rq = bl_value(r, q, unit_line());
    CHECK(pq == doctest::Approx(qp).epsilon(1e-12));  // canonical orientation
    CHECK(pq <= pr + rq + 1e-7);
    CHECK(pq <= 2.0 + 1e-9);
    CHECK(pq >= 0.0);
  }
}

TEST_CASE("bl optimum is invariant under support relabeling") {
  // same measures presented in different atom orders
  auto p1 = DiscreteMeasure<double>({0.1, 0.5, 0.9}, {0.2, 0.3, 0.5});
  auto p2 = DiscreteMeasure<double>({0.9, 0.1, 0.5}, {0.5, 0.2, 0.3});
  auto q = DiscreteMeasure<double>({0.3, 0.7}, {0.6, 0.4});
  CHECK(bl_value(p1, q, unit_line()) == doctest::Approx(bl_value(p2, q, unit_line())));
}

TEST_CASE("bl shrinks when the ground metric shrinks (dirac pairs)") {
  for (double scale : {1.0, 0.7, 0.4, 0.1}) {
    auto d0 = DiscreteMeasure<double>::dirac(0.0);
    auto dt = DiscreteMeasure<double>::dirac(0.8);
    MetricSpace<double> scaled;
    scaled.dist = [scale](double a, double b) { return scale * std::fabs(a - b); };
    scaled.diameter_bound = scale;
    scaled.coordinate = [scale](double x) { return scale * x; };
    double v = bl_value(d0, dt, scaled);
    CHECK(v == doctest::Approx(oracles::dirac_bl_closed_form(scale * 0.8)).epsilon(1e-7));
  }
}

TEST_CASE("bl capacity guard") {
  std::vector<double> xs(40);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i) / 40.0;
  auto p = DiscreteMeasure<double>::uniform_on(xs);
  auto q = DiscreteMeasure<double>::dirac(0.5);
  BlOptions opt;
  opt.max_union_support = 16;
  CHECK_THROWS_AS(bl_distance(p, q, unit_line(), opt), CapacityError);
}

TEST_CASE("lp instance dump file") {
  auto p = DiscreteMeasure<double>({0.0, 1.0}, {0.5, 0.5});
  auto q = DiscreteMeasure<double>::dirac(0.25);
  BlOptions opt;
  opt.dump_path = (std::filesystem::temp_directory_path() / "bl_dump_test.txt").string();
  BlSolution sol = bl_distance(p, q, unit_line(), opt);
  std::ifstream in(opt.dump_path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "bl_instance v1");
  std::string atoms_line;
  std::getline(in, atoms_line);
  CHECK(atoms_line == "atoms 3");
  (void)sol;
  std::filesystem::remove(opt.dump_path);
}

TEST_CASE("measure space reduces to inner distance on dirac-style outers") {
  MetricSpace<double> inner = unit_line();
  MetricSpace<DiscreteMeasure<double>> outer = measure_space(inner);
  auto pa = DiscreteMeasure<double>({0.0, 0.6}, {0.5, 0.5});
  auto pb = DiscreteMeasure<double>({0.2, 0.9}, {0.3, 0.7});
  CHECK(outer.dist(pa, pa) == 0.0);
  CHECK(outer.dist(pa, pb) == doctest::Approx(bl_value(pa, pb, inner)));

  // one-atom outer measures: nested bl equals inner bl
  using Law = DiscreteMeasure<DiscreteMeasure<double>>;
  Law la = Law::dirac(pa);
  Law lb = Law::dirac(pb);
  CHECK(bl_value(la, lb, measure_space(inner)) ==
        doctest::Approx(oracles::dirac_bl_closed_form(bl_value(pa, pb, inner))).epsilon(1e-7));
}

TEST_CASE("prohorov dirac pairs follow min(t, 1)") {
  MetricSpace<double> wide = interval_space(0.0, 2.0);
  for (double t : {0.25, 0.4, 1.0, 1.5}) {
    auto d0 = DiscreteMeasure<double>::dirac(0.0);
    auto dt = DiscreteMeasure<double>::dirac(t);
    CHECK(prohorov_distance(d0, dt, wide) ==
          doctest::Approx(std::min(t, 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("prohorov equals the exhaustive Strassen oracle") {
  Rng rng(555);
  for (int t = 0; t < 15; ++t) {
    auto p = oracles::random_measure(rng, 5);
    auto q = oracles::random_measure(rng, 5);
    double got = prohorov_distance(p, q, unit_line());
    double expect = oracles::prohorov_exhaustive(p, q, unit_line());
    CHECK(got == doctest::Approx(expect).epsilon(1e-6));
    // symmetry within tolerance
    CHECK(prohorov_distance(q, p, unit_line()) == doctest::Approx(got).epsilon(1e-6));
  }
}

TEST_CASE("prohorov witness certifies the lower bound") {
  auto p = DiscreteMeasure<double>({0.0, 0.1}, {0.7, 0.3});
  auto q = DiscreteMeasure<double>({0.8, 0.9}, {0.5, 0.5});
  ProhorovOptions opt;
  opt.want_witness = true;
  ProhorovResult res = prohorov(p, q, unit_line(), opt);
  REQUIRE(res.witness_set.has_value());
  double pa = 0.0;
  for (std::size_t i : *res.witness_set) pa += p.weights()[i];
  // Q(A^eps) at the witness epsilon
  double qball = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    double dmin = 1e300;
    for (std::size_t i : *res.witness_set)
      dmin = std::min(dmin, std::fabs(q.support()[j] - p.support()[i]));
    if (dmin <= res.witness_epsilon) qball += q.weights()[j];
  }
  CHECK(pa > qball + res.witness_epsilon);
}

TEST_CASE("metric relations report") {
  auto p = DiscreteMeasure<double>::dirac(0.3);
  auto rel_same = metric_relations(p, p, unit_line());
  CHECK(rel_same.bl == doctest::Approx(0.0));
  CHECK(rel_same.prohorov == doctest::Approx(0.0));
  CHECK(rel_same.bl_le_two_prohorov);
  CHECK(rel_same.pi_le_sqrt_bl);

  // boundary probe: distant diracs leave the small-distance regime, so the
  // sqrt inequality is recorded rather than asserted
  auto d0 = DiscreteMeasure<double>::dirac(0.0);
  auto d1 = DiscreteMeasure<double>::dirac(1.0);
  auto rel = metric_relations(d0, d1, unit_line());
  CHECK(rel.bl == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
  CHECK(rel.prohorov == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rel.bl_le_two_prohorov);
  CHECK_FALSE(rel.pi_le_sqrt_bl_asserted);
  CHECK_FALSE(rel.pi_le_sqrt_bl);  // 1 > sqrt(2/3): the recorded outcome

  // in the small regime both inequalities hold on random pairs
  Rng rng(777);
  int checked = 0;
  while (checked < 20) {
    auto a = oracles::random_measure(rng, 4);
    auto b = oracles::random_measure(rng, 4);
    auto r = metric_relations(a, b, unit_line());
    if (r.bl > 0.25) continue;
    ++checked;
    CHECK(r.bl_le_two_prohorov);
    CHECK(r.pi_le_sqrt_bl);
  }
}

TEST_CASE("mixture distance is below product distance (Lemma inequality)") {
  Rng rng(888);
  MetricSpace<double> line = unit_line();
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t n = 2 + rng.below(2);  // 2 or 3 factors
    std::vector<DiscreteMeasure<double>> ps, qs;
    for (std::size_t i = 0; i < n; ++i) {
      ps.push_back(oracles::random_measure(rng, 3));
      qs.push_back(oracles::random_measure(rng, 3));
    }
    auto prod_p = product_measure<double>(ps);
    auto prod_q = product_measure<double>(qs);
    std::vector<double> coef(n, 1.0 / static_cast<double>(n));
    auto mix_p = mixture<double>(ps, coef);
    auto mix_q = mixture<double>(qs, coef);

    MetricSpace<std::vector<double>> sum_space = product_space_sum(line, n);
    double mix_d = bl_value(mix_p, mix_q, line);
    double prod_d = bl_value(prod_p, prod_q, sum_space);
    CHECK(mix_d <= prod_d + 1e-7);
  }
}

TEST_CASE("grid oracle agreement on random pairs (spot check)") {
  Rng rng(999);
  for (int t = 0; t < 6; ++t) {
    auto p = oracles::random_measure(rng, 4);
    auto q = oracles::random_measure(rng, 4);
    BlOptions opt;
    opt.method = BlMethod::kSimplex;
    double got = bl_distance(p, q, unit_line(), opt).value;
    double expect = oracles::bl_grid_oracle_measures(p, q, unit_line(), 1e-2);
    CHECK(got == doctest::Approx(expect).epsilon(1e-5));
  }
}
