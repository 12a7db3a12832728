#include "feaslab/catalog.hpp"

#include <stdexcept>

namespace feaslab {

namespace {

using SD = ScalarDistribution;

std::shared_ptr<const StochasticProblem> finish(StochasticProblem p) {
  p.validate();
  return std::make_shared<const StochasticProblem>(std::move(p));
}

StochasticProblem chain_base(int dim, Vector lo, Vector hi) {
  StochasticProblem p;
  p.dim = dim;
  p.box.lo = std::move(lo);
  p.box.hi = std::move(hi);
  return p;
}

// Single chain x <= l with a four-atom threshold law; the linear objective
// pushes the solution onto the sampled boundary.
std::shared_ptr<const StochasticProblem> m1_discrete() {
  StochasticProblem p = chain_base(1, {-1.0}, {1.0});
  p.objective.kind = ObjectiveSpec::Kind::linear;
  p.objective.c = {-1.0};
  ChainDomainSpec d;
  d.dim = 1;
  d.chains.push_back({ConstraintFn::affine({1.0}, 0.0),
                      SD::discrete({0.0, 0.25, 0.5, 0.75}, {0.3, 0.3, 0.2, 0.2})});
  p.domain = std::move(d);
  return finish(std::move(p));
}

std::shared_ptr<const StochasticProblem> m2_uniform(bool independent) {
  StochasticProblem p = chain_base(2, {-1.0, -1.0}, {1.0, 1.0});
  p.objective.kind = ObjectiveSpec::Kind::linear;
  p.objective.c = {-1.0, -1.0};
  ChainDomainSpec d;
  d.dim = 2;
  d.chains.push_back({ConstraintFn::affine({1.0, 0.0}, 0.0), SD::uniform(0.0, 1.0)});
  d.chains.push_back({ConstraintFn::affine({0.0, 1.0}, 0.0), SD::uniform(0.0, 1.0)});
  d.independent_thresholds = independent;
  p.domain = std::move(d);
  return finish(std::move(p));
}

std::shared_ptr<const StochasticProblem> m4_mixed(bool independent) {
  StochasticProblem p = chain_base(2, {-1.0, -1.0}, {1.0, 1.0});
  p.objective.kind = ObjectiveSpec::Kind::linear;
  p.objective.c = {-1.0, -0.5};
  ChainDomainSpec d;
  d.dim = 2;
  d.chains.push_back({ConstraintFn::affine({1.0, 0.0}, 0.0), SD::uniform(0.0, 1.0)});
  d.chains.push_back({ConstraintFn::affine({0.0, 1.0}, 0.0), SD::uniform(0.0, 1.0)});
  d.chains.push_back({ConstraintFn::affine({0.5, 0.5}, 0.0),
                      SD::shifted_scaled(SD::exponential(1.0), 0.1, 0.5)});
  d.chains.push_back({ConstraintFn::affine({1.0, -1.0}, 0.0),
                      SD::discrete({0.2, 0.6, 1.0}, {0.3, 0.4, 0.3})});
  d.independent_thresholds = independent;
  p.domain = std::move(d);
  return finish(std::move(p));
}

// Norm and quadratic chains; exercised by configs and unit tests.
std::shared_ptr<const StochasticProblem> quadratic_norm_demo() {
  StochasticProblem p = chain_base(2, {-2.0, -2.0}, {2.0, 2.0});
  p.objective.kind = ObjectiveSpec::Kind::linear;
  p.objective.c = {-1.0, 0.0};
  ChainDomainSpec d;
  d.dim = 2;
  Matrix Q{{1.0, 0.0}, {0.0, 1.0}};
  d.chains.push_back({ConstraintFn::quadratic(Q, {0.0, 0.0}, 0.0), SD::uniform(0.25, 1.0)});
  d.chains.push_back({ConstraintFn::norm_ball({0.0, 0.0}), SD::uniform(0.6, 1.4)});
  p.domain = std::move(d);
  return finish(std::move(p));
}

// 1-D instance whose true optimum sits strictly inside dom F: the sampled
// median drifts past the boundary only on exponentially rare samples.
std::shared_ptr<const StochasticProblem> interior_1d() {
  StochasticProblem p = chain_base(1, {-2.0}, {2.0});
  p.objective.kind = ObjectiveSpec::Kind::abs_deviation;
  p.objective.a = {1.0};
  p.objective.law = SD::uniform(-1.3, 1.7);  // median 0.2, P{xi > 0.5} = 0.4
  ChainDomainSpec d;
  d.dim = 1;
  d.chains.push_back({ConstraintFn::affine({1.0}, 0.0), SD::uniform(0.5, 1.5)});
  p.domain = std::move(d);
  return finish(std::move(p));
}

// Same objective but a never-binding chain: dom f_xi is all of R.
std::shared_ptr<const StochasticProblem> interior_free() {
  StochasticProblem p = chain_base(1, {-2.0}, {2.0});
  p.objective.kind = ObjectiveSpec::Kind::abs_deviation;
  p.objective.a = {1.0};
  p.objective.law = SD::uniform(-1.3, 1.7);
  ChainDomainSpec d;
  d.dim = 1;
  d.chains.push_back({ConstraintFn::affine({0.0}, -1.0), SD::point_mass(0.0)});
  p.domain = std::move(d);
  return finish(std::move(p));
}

// Four chains, exactly one active at the true optimum (0,0): the objective
// -x1 + |x2| presses only against chain 1.
std::shared_ptr<const StochasticProblem> active_m4(bool perturbed) {
  StochasticProblem p = chain_base(2, {-1.0, -1.0}, {1.0, 1.0});
  p.objective.kind = ObjectiveSpec::Kind::linear_abs;
  p.objective.c = {-1.0, 0.0};
  p.objective.a = {0.0, 1.0};
  p.objective.law = SD::point_mass(0.0);
  double s = perturbed ? 0.1 : 0.0;  // loosen the inactive chains only
  ChainDomainSpec d;
  d.dim = 2;
  d.chains.push_back({ConstraintFn::affine({1.0, 0.0}, 0.0), SD::uniform(0.0, 1.0)});
  d.chains.push_back({ConstraintFn::affine({0.0, 1.0}, 0.0), SD::uniform(0.8 + s, 1.8 + s)});
  d.chains.push_back({ConstraintFn::affine({1.0, 1.0}, 0.0), SD::uniform(1.5 + s, 2.5 + s)});
  d.chains.push_back({ConstraintFn::affine({0.5, -0.5}, 0.0), SD::uniform(2.0 + s, 3.0 + s)});
  p.domain = std::move(d);
  return finish(std::move(p));
}

// min -x + E[y] s.t. y = h - x, y >= 0: the optimum rides the recourse
// boundary x = min_i h_i.
std::shared_ptr<const StochasticProblem> two_stage_boundary() {
  StochasticProblem p;
  p.dim = 1;
  p.box.lo = {0.0};
  p.box.hi = {3.0};
  TwoStageLP ts;
  ts.c = {-1.0};
  ts.g = {1.0};
  ts.W = Matrix{{1.0}};
  ts.T = Matrix{{1.0}};
  ts.h_laws.push_back(SD::uniform(1.0, 2.0));
  p.recourse = std::move(ts);
  return finish(std::move(p));
}

// W = [1, -1] has the zero recourse cone: every first stage is feasible.
std::shared_ptr<const StochasticProblem> two_stage_complete() {
  StochasticProblem p;
  p.dim = 1;
  p.box.lo = {0.0};
  p.box.hi = {2.0};
  TwoStageLP ts;
  ts.c = {-1.0};
  ts.g = {1.0, 1.0};
  ts.W = Matrix{{1.0, -1.0}};
  ts.T = Matrix{{1.0}};
  ts.h_laws.push_back(SD::uniform(0.0, 1.0));
  p.recourse = std::move(ts);
  return finish(std::move(p));
}

std::shared_ptr<const MultistageProblem> multistage_t2() {
  MultistageProblem p;
  p.first.A = Matrix{{1.0, 1.0}};  // x + s = 1, x,s >= 0
  p.first.b = {1.0};
  p.first.cost = {-1.0, 0.0};
  p.stages.push_back(StageData::make(2, Matrix{{1.0}}, Matrix{{1.0, 0.0}},
                                     {SD::uniform(0.0, 1.0)}, {0.0}));
  p.validate();
  return std::make_shared<const MultistageProblem>(std::move(p));
}

// Recourse cone with a non-axis-aligned ray: the stage is feasible iff
// b1 - b2 >= 0.5 x and b2 >= 0.5 x, so trees without a feasible assignment
// occur at a positive rate (censored) and the stage dof needs Monte Carlo.
std::shared_ptr<const MultistageProblem> multistage_t2_skew() {
  MultistageProblem p;
  p.first.A = Matrix{{1.0, 1.0}};
  p.first.b = {1.0};
  p.first.cost = {-1.0, 0.0};
  p.stages.push_back(StageData::make(2, Matrix{{1.0, 1.0}, {0.0, 1.0}},
                                     Matrix{{1.0, 0.0}, {0.5, 0.0}},
                                     {SD::uniform(0.0, 2.0), SD::uniform(0.0, 2.0)},
                                     {0.0, 0.0}));
  p.validate();
  return std::make_shared<const MultistageProblem>(std::move(p));
}

// Three stages; stage-2 recourse slack w couples into stage 3, so both
// stage transitions carry nontrivial feasibility pressure.
std::shared_ptr<const MultistageProblem> multistage_t3() {
  MultistageProblem p;
  p.first.A = Matrix{{1.0, 1.0}};
  p.first.b = {1.0};
  p.first.cost = {-1.0, 0.0};
  p.stages.push_back(StageData::make(
      2, Matrix{{1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}}, Matrix{{1.0, 0.0}, {0.5, 0.0}},
      {SD::uniform(0.0, 1.0), SD::uniform(0.0, 1.0)}, {0.0, 0.0, -0.5}));
  p.stages.push_back(StageData::make(
      3, Matrix{{1.0, 0.0}, {0.0, 1.0}}, Matrix{{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}},
      {SD::uniform(0.0, 1.0), SD::point_mass(1.0)}, {0.0, 0.0}));
  p.validate();
  return std::make_shared<const MultistageProblem>(std::move(p));
}

}  // namespace

std::shared_ptr<const StochasticProblem> catalog_problem(const std::string& name) {
  if (name == "m1_discrete") return m1_discrete();
  if (name == "m2_indep_uniform") return m2_uniform(true);
  if (name == "m2_comonotone_uniform") return m2_uniform(false);
  if (name == "m4_indep_mixed") return m4_mixed(true);
  if (name == "m4_comonotone_mixed") return m4_mixed(false);
  if (name == "quadratic_norm_demo") return quadratic_norm_demo();
  if (name == "interior_1d") return interior_1d();
  if (name == "interior_free") return interior_free();
  if (name == "active_m4_j1") return active_m4(false);
  if (name == "active_m4_j1_perturbed") return active_m4(true);
  if (name == "two_stage_boundary") return two_stage_boundary();
  if (name == "two_stage_complete") return two_stage_complete();
  throw std::invalid_argument("unknown catalog problem: " + name);
}

std::shared_ptr<const MultistageProblem> catalog_multistage(const std::string& name) {
  if (name == "multistage_t2") return multistage_t2();
  if (name == "multistage_t2_skew") return multistage_t2_skew();
  if (name == "multistage_t3") return multistage_t3();
  throw std::invalid_argument("unknown catalog multistage problem: " + name);
}

std::vector<std::string> catalog_problem_names() {
  return {"m1_discrete",       "m2_indep_uniform", "m2_comonotone_uniform",
          "m4_indep_mixed",    "m4_comonotone_mixed", "quadratic_norm_demo",
          "interior_1d",       "interior_free",    "active_m4_j1",
          "active_m4_j1_perturbed", "two_stage_boundary", "two_stage_complete"};
}

std::vector<std::string> catalog_multistage_names() {
  return {"multistage_t2", "multistage_t2_skew", "multistage_t3"};
}

std::vector<std::string> bound_check_battery() {
  return {"m1_discrete", "m2_indep_uniform", "m2_comonotone_uniform", "m4_indep_mixed",
          "m4_comonotone_mixed"};
}

}  // namespace feaslab
