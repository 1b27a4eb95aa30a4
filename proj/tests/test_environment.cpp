#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rcmlab/environment.hpp"
#include "rcmlab/rng.hpp"

using namespace rcm;

TEST_CASE("constant law gives unit weights everywhere") {
  const Environment env = Environment::sample({2, 3, 1}, ConductanceLaw::constant(1.0), 99);
  for (double w : env.weights()) CHECK(w == 1.0);
}

TEST_CASE("polynomial inverse CDF") {
  const ConductanceLaw law05 = ConductanceLaw::polynomial(0.5);
  CHECK(law05.inverse_cdf(0.25) == doctest::Approx(0.0625).epsilon(1e-14));
  const ConductanceLaw law02 = ConductanceLaw::polynomial(0.2);
  CHECK(law02.inverse_cdf(0.1) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(ConductanceLaw::constant(3.0).inverse_cdf(0.7) == 3.0);
  CHECK_THROWS_AS(law05.inverse_cdf(1.5), DomainError);
  CHECK_THROWS_AS(law05.inverse_cdf(-0.1), DomainError);
  CHECK_THROWS_AS(ConductanceLaw::polynomial(0.0), ConfigError);
  CHECK_THROWS_AS(ConductanceLaw::polynomial(-1.0), ConfigError);
}

TEST_CASE("table law matches its source to interpolation accuracy") {
  const ConductanceLaw poly = ConductanceLaw::polynomial(0.5);
  const ConductanceLaw tab = ConductanceLaw::table_from(poly, 10000);
  CHECK(tab.inverse_cdf(0.25) == doctest::Approx(0.0625).epsilon(1e-6));
  CHECK(tab.cdf(0.0625) == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("sampling is reproducible per seed and differs across seeds") {
  const BoxSpec spec{2, 8, 0};
  const ConductanceLaw law = ConductanceLaw::polynomial(0.3);
  const Environment a = Environment::sample(spec, law, 42);
  const Environment b = Environment::sample(spec, law, 42);
  const Environment c = Environment::sample(spec, law, 43);
  REQUIRE(a.edge_count() == b.edge_count());
  bool all_equal = true;
  bool any_differs = false;
  for (std::int64_t e = 0; e < a.edge_count(); ++e) {
    if (a.weight_by_id(e) != b.weight_by_id(e)) all_equal = false;
    if (a.weight_by_id(e) != c.weight_by_id(e)) any_differs = true;
  }
  CHECK(all_equal);
  CHECK(any_differs);
}

TEST_CASE("weights are independent of enumeration order") {
  // querying an edge by (site, axis) must equal what a fresh sampling of the
  // same edge id produces, no matter which subset is touched first
  const BoxSpec spec{2, 5, 1};
  const ConductanceLaw law = ConductanceLaw::polynomial(0.4);
  const Environment env = Environment::sample(spec, law, 7);
  for (std::int64_t e = env.edge_count() - 1; e >= 0; e -= 3) {
    const double direct = law.inverse_cdf(uniform01(7, static_cast<std::uint64_t>(e)));
    CHECK(env.weight_by_id(e) == direct);
  }
  const auto [site, axis] = env.edges().endpoint_axis(17);
  CHECK(env.weight(env.box().coords_of(site), axis) == env.weight_by_id(17));
}

TEST_CASE("pi field") {
  SUBCASE("constant environment has pi = 2d") {
    const Environment env = Environment::sample({2, 4, 1}, ConductanceLaw::constant(1.0), 1);
    const SpeedField pi = pi_field(env);
    for (double v : pi.values) CHECK(v == doctest::Approx(4.0));
  }
  SUBCASE("edited incident weights sum directly") {
    Environment env = Environment::sample({2, 2, 1}, ConductanceLaw::constant(1.0), 1);
    const Coords o = make_coords({0, 0});
    env = env.with_weight(o, 0, 0.1);
    env = env.with_weight(o, 1, 0.2);
    env = env.with_weight(make_coords({-1, 0}), 0, 0.3);
    env = env.with_weight(make_coords({0, -1}), 1, 0.4);
    CHECK(pi_field(env).at(o) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("agrees with a direct re-summation oracle") {
    const Environment env = Environment::sample({2, 6, 1}, ConductanceLaw::polynomial(0.3), 7);
    const SpeedField pi = pi_field(env);
    const Box inner(2, 6);
    for (std::int64_t i = 0; i < inner.site_count(); ++i) {
      const Coords c = inner.coords_of(i);
      double sum = 0.0;
      for (int j = 0; j < 2; ++j) {
        Coords lo = c;
        lo[j] -= 1;
        sum += env.weight(c, j);
        sum += env.weight(lo, j);
      }
      CHECK(pi.at(c) == sum);  // bit exact: incident edges in a fixed order
    }
  }
  SUBCASE("outside the materialized interior is an error") {
    const Environment env = Environment::sample({2, 3, 1}, ConductanceLaw::constant(1.0), 1);
    const SpeedField pi = pi_field(env);
    CHECK_THROWS_AS(pi.at(make_coords({4, 0})), DomainError);
    CHECK_THROWS_AS(pi_field(Environment::sample({2, 3, 0}, ConductanceLaw::constant(1.0), 1)),
                    DomainError);
  }
}

TEST_CASE("argmin site is the lexicographically first minimizer") {
  Environment env = Environment::sample({2, 2, 1}, ConductanceLaw::constant(1.0), 1);
  // plant two equal traps; the lex-smaller site must win
  for (const auto& site : {make_coords({1, 1}), make_coords({-1, -1})}) {
    for (int j = 0; j < 2; ++j) {
      Coords lo = site;
      lo[j] -= 1;
      env = env.with_weight(site, j, 1e-6).with_weight(lo, j, 1e-6);
    }
  }
  const SpeedField pi = pi_field(env);
  CHECK(pi.argmin_site == make_coords({-1, -1}));
}

TEST_CASE("empirical CDF of polynomial weights within the 4-sigma binomial band") {
  const BoxSpec spec{2, 352, 0};  // ~1e6 edges
  const ConductanceLaw law = ConductanceLaw::polynomial(0.5);
  const Environment env = Environment::sample(spec, law, 2024);
  const double N = static_cast<double>(env.edge_count());
  REQUIRE(N > 9.9e5);
  for (double a : {0.01, 0.1, 0.5}) {
    std::int64_t hits = 0;
    for (double w : env.weights()) {
      if (w <= a) ++hits;
    }
    const double p = std::pow(a, 0.5);
    const double tol = 4.0 * std::sqrt(p * (1.0 - p) / N);
    CHECK(std::abs(static_cast<double>(hits) / N - p) <= tol);
  }
}

TEST_CASE("pi indicators on the even sublattice are uncorrelated") {
  // two fixed non-adjacent even sites over many seeds
  const Coords s1 = make_coords({0, 0});
  const Coords s2 = make_coords({1, 1});
  const double a = 0.5;
  const int n_seeds = 10000;
  double m1 = 0, m2 = 0, m12 = 0;
  for (int s = 0; s < n_seeds; ++s) {
    const Environment env =
        Environment::sample({2, 2, 1}, ConductanceLaw::polynomial(0.3), 5000 + s);
    const SpeedField pi = pi_field(env);
    const double x = pi.at(s1) <= a ? 1.0 : 0.0;
    const double y = pi.at(s2) <= a ? 1.0 : 0.0;
    m1 += x;
    m2 += y;
    m12 += x * y;
  }
  m1 /= n_seeds;
  m2 /= n_seeds;
  m12 /= n_seeds;
  const double cov = m12 - m1 * m2;
  const double se = std::sqrt(m1 * (1 - m1) * m2 * (1 - m2) / n_seeds);
  CHECK(std::abs(cov) <= 4.0 * se);
}

TEST_CASE("binary round-trip is exact") {
  const Environment env = Environment::sample({2, 4, 2}, ConductanceLaw::polynomial(0.25), 77);
  std::stringstream buf;
  env.save(buf);
  const Environment back = Environment::load(buf);
  CHECK(back.spec().d == env.spec().d);
  CHECK(back.spec().n == env.spec().n);
  CHECK(back.spec().pad == env.spec().pad);
  CHECK(back.seed() == env.seed());
  CHECK(back.law() == env.law());
  REQUIRE(back.edge_count() == env.edge_count());
  for (std::int64_t e = 0; e < env.edge_count(); ++e)
    CHECK(back.weight_by_id(e) == env.weight_by_id(e));

  std::stringstream junk("not an environment");
  CHECK_THROWS_AS(Environment::load(junk), IoError);
}

TEST_CASE("table-law environments round-trip too") {
  const ConductanceLaw tab = ConductanceLaw::table_from(ConductanceLaw::polynomial(0.5), 64);
  const Environment env = Environment::sample({2, 2, 0}, tab, 3);
  std::stringstream buf;
  env.save(buf);
  const Environment back = Environment::load(buf);
  CHECK(back.law() == env.law());
  CHECK(back.weights()[0] == env.weights()[0]);
}
