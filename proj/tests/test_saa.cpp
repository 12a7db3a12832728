#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "feaslab/catalog.hpp"
#include "feaslab/chain_domain.hpp"
#include "feaslab/multistage.hpp"
#include "feaslab/saa.hpp"

using namespace feaslab;

namespace {

// 1-D brute-force oracle: minimize the instance objective over the SAA domain
// by grid scan at the given resolution.
double grid_minimize_1d(const SAAInstance& inst, double lo, double hi, double step) {
  double best = std::numeric_limits<double>::infinity();
  Vector x(1);
  for (double v = lo; v <= hi + 1e-12; v += step) {
    x[0] = v;
    bool ok = true;
    if (inst.problem->domain) {
      for (int k = 0; k < inst.problem->domain->order(); ++k) {
        if (inst.problem->domain->chains[static_cast<std::size_t>(k)].fn.eval(x) >
            inst.thresholds.minima[static_cast<std::size_t>(k)] + 1e-12) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    best = std::min(best, inst.objective_value(x));
  }
  return best;
}

StochasticProblem quadratic_over_box() {
  StochasticProblem p;
  p.dim = 1;
  p.box.lo = {0.0};
  p.box.hi = {1.0};
  p.objective.kind = ObjectiveSpec::Kind::quadratic_diag;
  p.objective.weights = {1.0};
  p.objective.center = {0.3};
  p.validate();
  return p;
}

StochasticProblem median_with_chain() {
  StochasticProblem p;
  p.dim = 1;
  p.box.lo = {-2.0};
  p.box.hi = {2.0};
  p.objective.kind = ObjectiveSpec::Kind::abs_deviation;
  p.objective.a = {1.0};
  p.objective.law = ScalarDistribution::uniform(-1.0, 1.0);
  ChainDomainSpec d;
  d.dim = 1;
  d.chains.push_back({ConstraintFn::affine({1.0}, 0.0), ScalarDistribution::uniform(-0.5, 0.8)});
  p.domain = std::move(d);
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("assembled instances average the sampled terms") {
  StochasticProblem p;
  p.dim = 1;
  p.box.lo = {-1.0};
  p.box.hi = {1.0};
  p.objective.kind = ObjectiveSpec::Kind::abs_deviation;
  p.objective.a = {1.0};
  p.objective.law = ScalarDistribution::uniform(0.0, 1.0);
  p.validate();

  SAAInstance inst = assemble_saa(p, 3, {42, 0, 0, StreamRole::threshold});
  REQUIRE(inst.objective_draws.size() == 3);
  // F_hat(x) = (1/3) sum |x - draw_i|.
  Vector x{0.5};
  double expect = 0.0;
  for (double d : inst.objective_draws) expect += std::abs(0.5 - d) / 3.0;
  CHECK(inst.objective_value(x) == doctest::Approx(expect));

  // Fixed draws reproduce the spec-level arithmetic.
  inst.objective_draws = {0.1, 0.5, 0.9};
  CHECK(inst.objective_value(x) == doctest::Approx((0.4 + 0.0 + 0.4) / 3.0));

  SAAInstance one = assemble_saa(p, 1, {42, 0, 0, StreamRole::threshold});
  Vector y{0.25};
  CHECK(one.objective_value(y) ==
        doctest::Approx(std::abs(0.25 - one.objective_draws[0])));
}

TEST_CASE("deterministic objective ignores the sample") {
  StochasticProblem p = quadratic_over_box();
  SAAInstance a = assemble_saa(p, 5, {1, 0, 0, StreamRole::threshold});
  SAAInstance b = assemble_saa(p, 50, {2, 9, 0, StreamRole::threshold});
  Vector x{0.7};
  CHECK(a.objective_value(x) == b.objective_value(x));
}

TEST_CASE("unconstrained quadratic solves to its center") {
  StochasticProblem p = quadratic_over_box();
  SAAInstance inst = assemble_saa(p, 1, {3, 0, 0, StreamRole::threshold});
  SAASolution sol = solve_convex(inst, 1e-8);
  CHECK_FALSE(sol.saa_infeasible);
  CHECK(sol.gap <= 1e-8);
  CHECK(std::abs(sol.x[0] - 0.3) <= 2e-4);
  CHECK(sol.value == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("sampled median instance matches the grid oracle") {
  StochasticProblem p = median_with_chain();
  for (int trial = 0; trial < 10; ++trial) {
    SAAInstance inst =
        assemble_saa(p, 9, {77, static_cast<std::uint64_t>(trial), 0, StreamRole::threshold});
    SAASolution sol = solve_convex(inst, 1e-6);
    REQUIRE_FALSE(sol.saa_infeasible);
    CHECK(sol.feasibility_residual <= 1e-8);
    double oracle = grid_minimize_1d(inst, -2.0, 2.0, 1e-4);
    CHECK(sol.value <= oracle + 1e-4 + 1e-6);
    CHECK(sol.value >= oracle - 1e-4 - 1e-6);
    // Closed form: clamp the sample median at the chain minimum.
    std::vector<double> draws = inst.objective_draws;
    std::sort(draws.begin(), draws.end());
    double median = draws[4];
    double expect = std::min(median, inst.thresholds.minima[0]);
    CHECK(std::abs(sol.x[0] - expect) <= 1e-6);
  }
}

TEST_CASE("solution is invariant under sample row permutation") {
  StochasticProblem p = median_with_chain();
  SAAInstance inst = assemble_saa(p, 8, {78, 0, 0, StreamRole::threshold});
  SAASolution sol = solve_convex(inst, 1e-6);
  SAAInstance perm = inst;
  std::reverse(perm.objective_draws.begin(), perm.objective_draws.end());
  std::reverse(perm.thresholds.values.begin(), perm.thresholds.values.end());
  perm.thresholds.minima = perm.thresholds.recompute_minima();
  SAASolution sol2 = solve_convex(perm, 1e-6);
  CHECK(std::abs(sol.x[0] - sol2.x[0]) <= 1e-4);
}

TEST_CASE("empty SAA domain is reported, not thrown") {
  StochasticProblem p;
  p.dim = 1;
  p.box.lo = {0.5};  // box sits above every threshold realization
  p.box.hi = {1.0};
  p.objective.kind = ObjectiveSpec::Kind::linear;
  p.objective.c = {1.0};
  ChainDomainSpec d;
  d.dim = 1;
  d.chains.push_back({ConstraintFn::affine({1.0}, 0.0),
                      ScalarDistribution::uniform(-1.0, 0.4)});
  p.domain = std::move(d);
  // dom F = {x <= -1} misses the box, so validate() must reject it outright.
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  // With a wider box the problem is valid, but a low sample can still empty
  // the SAA domain; force it with a tiny thresholds sample.
  p.box.lo = {-2.0};
  p.validate();
  SAAInstance inst = assemble_saa(p, 1, {5, 0, 0, StreamRole::threshold});
  inst.thresholds.values = {-3.0};  // below the box
  inst.thresholds.minima = {-3.0};
  SAASolution sol = solve_convex(inst, 1e-6);
  CHECK(sol.saa_infeasible);
}

TEST_CASE("quadratic and norm chains are honored via cutting planes") {
  auto prob = catalog_problem("quadratic_norm_demo");
  SAAInstance inst = assemble_saa(*prob, 30, {91, 0, 0, StreamRole::threshold});
  SAASolution sol = solve_convex(inst, 1e-7);
  REQUIRE_FALSE(sol.saa_infeasible);
  CHECK(sol.feasibility_residual <= 1e-8);
  // max x1 over {x1^2 + x2^2 <= q_min, ||x|| <= n_min}: x1 = min(sqrt(q_min), n_min).
  double expect = std::min(std::sqrt(inst.thresholds.minima[0]), inst.thresholds.minima[1]);
  CHECK(std::abs(sol.x[0] - expect) <= 1e-4);
}

TEST_CASE("two-stage deterministic equivalent examples") {
  auto boundary = catalog_problem("two_stage_boundary");
  SAAInstance inst = assemble_saa(*boundary, 12, {101, 0, 0, StreamRole::threshold});
  SAASolution sol = solve_two_stage(inst);
  REQUIRE_FALSE(sol.saa_infeasible);
  double hmin = std::numeric_limits<double>::infinity();
  for (const Vector& h : inst.h_draws) hmin = std::min(hmin, h[0]);
  CHECK(sol.x[0] == doctest::Approx(hmin).epsilon(1e-9));

  // N = 1 reduces to one merged LP whose value matches the direct solve.
  SAAInstance single = assemble_saa(*boundary, 1, {102, 0, 0, StreamRole::threshold});
  SAASolution s1 = solve_two_stage(single);
  double h0 = single.h_draws[0][0];
  // min -x + (h - x) over 0 <= x <= h: optimum at x = h with value -h.
  CHECK(s1.value == doctest::Approx(-h0).epsilon(1e-9));

  // Complete recourse: the recourse rows never restrict the first stage, so
  // the extensive form matches the plain convex program -x + mean|h_i - x|.
  // Its optimal set is [max h_i, 2]; the lexicographic rule picks the left
  // endpoint and the value equals -mean(h_i).
  auto complete = catalog_problem("two_stage_complete");
  SAAInstance ci = assemble_saa(*complete, 8, {103, 0, 0, StreamRole::threshold});
  SAASolution cs = solve_two_stage(ci);
  REQUIRE_FALSE(cs.saa_infeasible);
  double hmax = -1.0, hmean = 0.0;
  for (const Vector& h : ci.h_draws) {
    hmax = std::max(hmax, h[0]);
    hmean += h[0] / 8.0;
  }
  CHECK(cs.x[0] == doctest::Approx(hmax).epsilon(1e-7));
  CHECK(cs.value == doctest::Approx(-hmean).epsilon(1e-9));
  SAASolution ck = solve_convex(ci, 1e-8);
  CHECK(std::abs(ck.value - cs.value) <= 1e-6);
}

TEST_CASE("convex path with recourse oracle matches the extensive form") {
  auto boundary = catalog_problem("two_stage_boundary");
  for (int trial = 0; trial < 5; ++trial) {
    SAAInstance inst = assemble_saa(*boundary, 6,
                                    {202, static_cast<std::uint64_t>(trial), 0,
                                     StreamRole::threshold});
    SAASolution lp = solve_two_stage(inst);
    SAASolution kelley = solve_convex(inst, 1e-8);
    REQUIRE_FALSE(lp.saa_infeasible);
    REQUIRE_FALSE(kelley.saa_infeasible);
    CHECK(std::abs(lp.value - kelley.value) <= 1e-6);
  }
}

TEST_CASE("returned solutions satisfy d(x*) >= dfrak_r") {
  StochasticProblem p = median_with_chain();
  for (int trial = 0; trial < 15; ++trial) {
    SAAInstance inst =
        assemble_saa(p, 12, {303, static_cast<std::uint64_t>(trial), 0, StreamRole::threshold});
    SAASolution sol = solve_convex(inst, 1e-6);
    REQUIRE_FALSE(sol.saa_infeasible);
    double dx = dof_point(*p.domain, sol.x, Analytic{}).value;
    double lower = dfrak_r(*p.domain, inst.thresholds, Analytic{}).value;
    CHECK(dx >= lower - 1e-12);
  }
}

TEST_CASE("uniform deviation diagnostics") {
  // Deterministic objective: zero deviation exactly.
  StochasticProblem det = quadratic_over_box();
  SAAInstance dinst = assemble_saa(det, 10, {404, 0, 0, StreamRole::threshold});
  std::vector<Vector> grid{{0.0}, {0.5}, {1.0}};
  auto dev = estimate_uniform_deviation(dinst, grid, 100, {404, 0, 0, StreamRole::oracle});
  CHECK(dev.max_deviation == 0.0);
  CHECK(dev.reference_stderr == 0.0);

  // f_xi(x) = xi * x with xi ~ U(0,1): deviation over {0, 1} is |mean - 1/2|.
  StochasticProblem lin;
  lin.dim = 1;
  lin.box.lo = {0.0};
  lin.box.hi = {1.0};
  lin.objective.kind = ObjectiveSpec::Kind::scaled_linear;
  lin.objective.a = {1.0};
  lin.objective.law = ScalarDistribution::uniform(0.0, 1.0);
  lin.validate();
  SAAInstance li = assemble_saa(lin, 25, {405, 0, 0, StreamRole::threshold});
  double draw_mean = 0.0;
  for (double d : li.objective_draws) draw_mean += d / 25.0;
  std::vector<Vector> grid2{{0.0}, {1.0}};
  auto dev2 = estimate_uniform_deviation(li, grid2, 100, {405, 0, 0, StreamRole::oracle});
  CHECK(dev2.max_deviation == doctest::Approx(std::abs(draw_mean - 0.5)).epsilon(1e-12));
}

TEST_CASE("uniform deviation decreases with N in median") {
  StochasticProblem lin;
  lin.dim = 1;
  lin.box.lo = {0.0};
  lin.box.hi = {1.0};
  lin.objective.kind = ObjectiveSpec::Kind::scaled_linear;
  lin.objective.a = {1.0};
  lin.objective.law = ScalarDistribution::uniform(0.0, 1.0);
  lin.validate();
  std::vector<Vector> grid{{0.0}, {1.0}};
  auto median_dev = [&](std::int64_t N) {
    std::vector<double> devs;
    for (int r = 0; r < 200; ++r) {
      SAAInstance inst =
          assemble_saa(lin, N, {500, static_cast<std::uint64_t>(r), 0, StreamRole::threshold});
      devs.push_back(
          estimate_uniform_deviation(inst, grid, 10, {1, 0, 0, StreamRole::oracle}).max_deviation);
    }
    std::sort(devs.begin(), devs.end());
    return devs[100];
  };
  CHECK(median_dev(1000) < median_dev(10));
}

TEST_CASE("recourse thresholds coincide with the induced functional chains") {
  // With W = I the second stage {y >= 0 : y = h - Tx} is feasible exactly on
  // {x : (Tx)_i <= h_i}, i.e. the chain domain with affine rows of T and the
  // h laws as thresholds. Both representations must give identical sample
  // minima and identical degree-of-feasibility values.
  StochasticProblem ts;
  ts.dim = 2;
  ts.box.lo = {0.0, 0.0};
  ts.box.hi = {1.0, 1.0};
  TwoStageLP rec;
  rec.c = {-1.0, -0.5};
  rec.g = {0.5, 0.5};
  rec.W = Matrix::identity(2);
  rec.T = Matrix{{1.0, 0.5}, {0.0, 1.0}};
  rec.h_laws.push_back(ScalarDistribution::uniform(0.2, 1.4));
  rec.h_laws.push_back(ScalarDistribution::uniform(0.1, 1.1));
  ts.recourse = rec;
  ts.validate();

  ChainDomainSpec chain;
  chain.dim = 2;
  chain.chains.push_back({ConstraintFn::affine({1.0, 0.5}, 0.0), rec.h_laws[0]});
  chain.chains.push_back({ConstraintFn::affine({0.0, 1.0}, 0.0), rec.h_laws[1]});
  chain.validate();

  for (int trial = 0; trial < 10; ++trial) {
    SeedSpec seed{606, static_cast<std::uint64_t>(trial), 0, StreamRole::threshold};
    SAAInstance inst = assemble_saa(ts, 15, seed);
    REQUIRE(inst.recourse_cone.rays.size() == 2);

    // Per-ray sample minima equal the per-chain minima of the h draws.
    ThresholdSample manual;
    manual.N = inst.N;
    manual.m = 2;
    for (const Vector& h : inst.h_draws) {
      manual.values.push_back(h[0]);
      manual.values.push_back(h[1]);
    }
    manual.minima = manual.recompute_minima();

    Vector x{0.3, 0.25};
    double via_chain = dof_point(chain, x, Analytic{}).value;
    StageData stage = StageData::make(2, rec.W, rec.T, rec.h_laws, {0.0, 0.0});
    double via_cone = stage_dof(stage, x, Analytic{}).value;
    CHECK(via_chain == doctest::Approx(via_cone).epsilon(1e-12));

    double dfrak_chain = dfrak_r(chain, manual, Analytic{}).value;
    double prod = rec.h_laws[0].prob_ge(manual.minima[0]) *
                  rec.h_laws[1].prob_ge(manual.minima[1]);
    CHECK(dfrak_chain == doctest::Approx(prod).epsilon(1e-12));

    // Farkas feasibility at x agrees with the chain membership test.
    for (const Vector& h : inst.h_draws) {
      Vector thr{h[0], h[1]};
      CHECK(farkas_feasible(inst.recourse_cone, h, rec.T, x) ==
            domain_contains(chain, x, thr));
    }
  }
}
