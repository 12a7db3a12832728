#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "feaslab/distribution.hpp"
#include "feaslab/rng.hpp"
#include "feaslab/stats.hpp"

using namespace feaslab;

TEST_CASE("streams are deterministic and order-independent") {
  SeedSpec spec{42, 7, 3, StreamRole::objective};
  RngStream a = make_stream(spec);
  RngStream b = make_stream(spec);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // Substreams depend on the seed, not on how much the parent consumed.
  RngStream c = make_stream(spec);
  c.next_u64();
  c.next_u64();
  RngStream s1 = make_stream(spec).substream(5);
  RngStream s2 = c.substream(5);
  CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("distinct stream roles decorrelate") {
  SeedSpec t{99, 12, 0, StreamRole::threshold};
  SeedSpec o{99, 12, 0, StreamRole::objective};
  RngStream st = make_stream(t);
  RngStream so = make_stream(o);
  const int n = 100000;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = st.uniform01();
    ys[i] = so.uniform01();
  }
  double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  double r = sxy / std::sqrt(sxx * syy);
  CHECK(std::abs(r) < 0.02);
}

TEST_CASE("point mass sampling is constant") {
  auto d = ScalarDistribution::point_mass(5.0);
  RngStream s = make_stream({1, 0, 0, StreamRole::threshold});
  for (int i = 0; i < 100; ++i) CHECK(d.sample(s) == 5.0);
}

TEST_CASE("uniform empirical mean matches the law") {
  auto d = ScalarDistribution::uniform(0.0, 1.0);
  RngStream s = make_stream({2, 0, 0, StreamRole::threshold});
  const int n = 100000;
  KahanSum sum;
  for (int i = 0; i < n; ++i) sum.add(d.sample(s));
  CHECK(std::abs(sum.value() / n - 0.5) < 0.01);
}

TEST_CASE("exponential empirical mean matches 1/rate") {
  auto d = ScalarDistribution::exponential(2.0);
  RngStream s = make_stream({3, 0, 0, StreamRole::threshold});
  const int n = 100000;
  KahanSum sum;
  for (int i = 0; i < n; ++i) sum.add(d.sample(s));
  CHECK(std::abs(sum.value() / n - 0.5) < 0.02);
}

TEST_CASE("cdf values") {
  CHECK(ScalarDistribution::uniform(0, 1).cdf(0.3) == doctest::Approx(0.3));
  auto disc = ScalarDistribution::discrete({1.0, 2.0}, {0.5, 0.5});
  CHECK(disc.cdf(1.0) == doctest::Approx(0.5));  // right-continuous step
  CHECK(disc.cdf(0.999) == doctest::Approx(0.0));
  CHECK(disc.prob_lt(1.0) == doctest::Approx(0.0));
  CHECK(ScalarDistribution::exponential(1.0).cdf(1.0) ==
        doctest::Approx(0.6321205588285577).epsilon(1e-12));
}

TEST_CASE("beta quantiles") {
  CHECK(ScalarDistribution::exponential(1.0).quantile_beta(0.0) == 0.0);
  CHECK(ScalarDistribution::uniform(0, 1).quantile_beta(0.5) == doctest::Approx(0.5));
  // P{l <= 1} = 0.5 is not > 0.5, so the 0.5-quantile is the next atom.
  auto disc = ScalarDistribution::discrete({1.0, 2.0}, {0.5, 0.5});
  CHECK(disc.quantile_beta(0.5) == 2.0);
  CHECK(disc.quantile_beta(0.49) == 1.0);
  CHECK(disc.quantile_beta(0.0) == 1.0);
  CHECK(std::isinf(ScalarDistribution::normal(0, 1).quantile_beta(0.0)));
}

TEST_CASE("cdf(quantile_beta(beta)) >= beta over a parameter grid") {
  std::vector<ScalarDistribution> dists;
  dists.push_back(ScalarDistribution::uniform(-2.0, 3.0));
  dists.push_back(ScalarDistribution::exponential(0.7));
  dists.push_back(ScalarDistribution::normal(1.0, 2.0));
  dists.push_back(ScalarDistribution::discrete({0.0, 0.25, 0.5, 2.0}, {0.1, 0.4, 0.2, 0.3}));
  dists.push_back(
      ScalarDistribution::shifted_scaled(ScalarDistribution::exponential(1.5), 0.3, 2.0));
  for (const auto& d : dists) {
    for (double beta = 0.0; beta < 1.0; beta += 0.01) {
      double q = d.quantile_beta(beta);
      if (std::isinf(q)) continue;  // normal at beta = 0
      CHECK(d.cdf(q) >= beta - 1e-12);
    }
  }
}

TEST_CASE("normal quantile and cdf are consistent inverses") {
  auto d = ScalarDistribution::normal(0.0, 1.0);
  for (double p : {1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1 - 1e-6}) {
    double q = standard_normal_quantile(p);
    CHECK(d.cdf(q) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(standard_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("distribution parameter validation") {
  CHECK_THROWS_AS(ScalarDistribution::uniform(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalarDistribution::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalarDistribution::normal(0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalarDistribution::discrete({1.0, 2.0}, {0.6, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(
      ScalarDistribution::shifted_scaled(ScalarDistribution::uniform(0, 1), 0.0, -2.0),
      std::invalid_argument);
  CHECK_THROWS_AS(ScalarDistribution::uniform(0, 1).quantile_beta(1.0), std::invalid_argument);
}

TEST_CASE("shifted_scaled wraps cdf, quantile and mean consistently") {
  auto inner = ScalarDistribution::exponential(1.0);
  auto w = ScalarDistribution::shifted_scaled(inner, 0.1, 0.5);
  CHECK(w.essential_infimum() == doctest::Approx(0.1));
  CHECK(w.mean() == doctest::Approx(0.1 + 0.5));
  CHECK(w.cdf(0.1 + 0.5 * 1.0) == doctest::Approx(inner.cdf(1.0)));
  CHECK(w.quantile_beta(0.3) == doctest::Approx(0.1 + 0.5 * inner.quantile_beta(0.3)));
}
