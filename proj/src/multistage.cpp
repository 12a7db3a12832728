#include "feaslab/multistage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "feaslab/errors.hpp"
#include "feaslab/lp.hpp"

namespace feaslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Index of the single nonzero component, or -1 when the vector touches
// several.
int single_component(const Vector& v) {
  int idx = -1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= 1e-12) continue;
    if (idx >= 0) return -1;
    idx = static_cast<int>(i);
  }
  return idx;
}

}  // namespace

StageData StageData::make(int t, Matrix A, Matrix B, std::vector<ScalarDistribution> b_laws,
                          Vector cost) {
  require(t >= 2, "StageData: t >= 2");
  require(A.rows >= 1 && A.cols >= 1, "StageData: empty A");
  require(B.rows == A.rows, "StageData: A/B row mismatch");
  require(static_cast<int>(b_laws.size()) == A.rows, "StageData: b law count mismatch");
  require(static_cast<int>(cost.size()) == A.cols, "StageData: cost dimension mismatch");
  StageData s;
  s.t = t;
  s.cone = enumerate_rays(A);  // cone of {r : r'A >= 0}; cached per stage
  s.A = std::move(A);
  s.B = std::move(B);
  s.b_laws = std::move(b_laws);
  s.cost = std::move(cost);
  return s;
}

void MultistageProblem::validate() const {
  require(first.A.rows == static_cast<int>(first.b.size()), "first stage: A/b mismatch");
  require(first.A.cols == static_cast<int>(first.cost.size()), "first stage: cost mismatch");
  require(!stages.empty(), "MultistageProblem: needs at least two stages");
  int prev_vars = first.num_vars();
  for (std::size_t s = 0; s < stages.size(); ++s) {
    require(stages[s].t == static_cast<int>(s) + 2, "MultistageProblem: stage indices must be 2..T");
    require(stages[s].B.cols == prev_vars, "MultistageProblem: B column/previous stage mismatch");
    prev_vars = stages[s].num_vars();
  }
}

std::int64_t ScenarioTree::path_count(int t) const {
  std::int64_t n = 1;
  for (int s = 2; s <= t; ++s) n *= branching.at(static_cast<std::size_t>(s - 2));
  return n;
}

ScenarioTree build_tree(const MultistageProblem& problem, const std::vector<int>& branching,
                        const SeedSpec& seed) {
  problem.validate();
  const int T = problem.horizon();
  require(static_cast<int>(branching.size()) == T - 1, "build_tree: branching size must be T-1");
  for (int n : branching) require(n >= 1, "build_tree: N_t >= 1 required");

  ScenarioTree tree;
  tree.problem = &problem;
  tree.branching = branching;

  // Identical conditional sampling: the same N_t draws of b are shared by
  // every stage-(t-1) node.
  for (int t = 2; t <= T; ++t) {
    SeedSpec s = seed;
    s.stage_index = static_cast<std::uint32_t>(t);
    s.role = StreamRole::threshold;
    RngStream stream = make_stream(s);
    const StageData& st = problem.stage(t);
    std::vector<Vector> draws(static_cast<std::size_t>(branching[static_cast<std::size_t>(t - 2)]));
    for (auto& b : draws) {
      b.resize(st.b_laws.size());
      for (std::size_t c = 0; c < b.size(); ++c) b[c] = st.b_laws[c].sample(stream);
    }
    tree.stage_samples.push_back(std::move(draws));
  }

  tree.nodes.push_back({1, -1, -1, {}});
  tree.stage_range.emplace_back(0, 1);
  int prev_begin = 0, prev_end = 1;
  for (int t = 2; t <= T; ++t) {
    int begin = static_cast<int>(tree.nodes.size());
    for (int p = prev_begin; p < prev_end; ++p)
      for (int i = 0; i < branching[static_cast<std::size_t>(t - 2)]; ++i)
        tree.nodes.push_back({t, p, i, {}});
    int end = static_cast<int>(tree.nodes.size());
    tree.stage_range.emplace_back(begin, end);
    prev_begin = begin;
    prev_end = end;
  }
  return tree;
}

bool solve_tree(ScenarioTree& tree) {
  require(tree.problem != nullptr, "solve_tree: empty tree");
  const MultistageProblem& prob = *tree.problem;

  // Variable layout: contiguous block per node.
  std::vector<int> offset(tree.nodes.size(), 0);
  int vars_n = 0;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    offset[i] = vars_n;
    int t = tree.nodes[i].stage;
    vars_n += t == 1 ? prob.first.num_vars() : prob.stage(t).num_vars();
  }
  int rows_n = prob.first.A.rows;
  for (std::size_t i = 1; i < tree.nodes.size(); ++i)
    rows_n += prob.stage(tree.nodes[i].stage).num_rows();

  LPProblem lp;
  lp.c.assign(static_cast<std::size_t>(vars_n), 0.0);
  lp.A = Matrix(rows_n, vars_n);
  lp.b.assign(static_cast<std::size_t>(rows_n), 0.0);
  lp.sense.assign(static_cast<std::size_t>(rows_n), RowSense::eq);
  lp.lower.assign(static_cast<std::size_t>(vars_n), 0.0);
  lp.upper.assign(static_cast<std::size_t>(vars_n), kInf);

  for (int j = 0; j < prob.first.num_vars(); ++j)
    lp.c[static_cast<std::size_t>(j)] = prob.first.cost[static_cast<std::size_t>(j)];
  int r = 0;
  for (int i = 0; i < prob.first.A.rows; ++i, ++r) {
    for (int j = 0; j < prob.first.num_vars(); ++j) lp.A(r, j) = prob.first.A(i, j);
    lp.b[static_cast<std::size_t>(r)] = prob.first.b[static_cast<std::size_t>(i)];
  }

  std::vector<double> node_prob(tree.nodes.size(), 1.0);
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    const StageData& st = prob.stage(node.stage);
    node_prob[i] = node_prob[static_cast<std::size_t>(node.parent)] /
                   tree.branching[static_cast<std::size_t>(node.stage - 2)];
    for (int j = 0; j < st.num_vars(); ++j)
      lp.c[static_cast<std::size_t>(offset[i] + j)] = node_prob[i] * st.cost[static_cast<std::size_t>(j)];
    const Vector& b = tree.stage_samples[static_cast<std::size_t>(node.stage - 2)]
                                        [static_cast<std::size_t>(node.sample)];
    for (int row = 0; row < st.num_rows(); ++row, ++r) {
      for (int j = 0; j < st.num_vars(); ++j) lp.A(r, offset[i] + j) = st.A(row, j);
      for (int j = 0; j < st.B.cols; ++j)
        lp.A(r, offset[static_cast<std::size_t>(node.parent)] + j) = st.B(row, j);
      lp.b[static_cast<std::size_t>(r)] = b[static_cast<std::size_t>(row)];
    }
  }

  LPResult res = lp_solve(lp);
  if (res.status == LPStatus::infeasible) {
    tree.infeasible = true;
    tree.solved = false;
    return false;
  }
  if (res.status == LPStatus::unbounded)
    throw SolverError("solve_tree: extensive form unbounded (model error)");

  // Lexicographic refinement of the root decision among optimal solutions.
  const int n1 = prob.first.num_vars();
  double slack = 1e-9 * std::max(1.0, std::abs(res.value));
  Vector final_z = res.x;
  LPProblem ref = lp;
  ref.A = Matrix(rows_n + 1 + n1, vars_n);
  ref.b.assign(static_cast<std::size_t>(rows_n + 1 + n1), 0.0);
  ref.sense.assign(static_cast<std::size_t>(rows_n + 1 + n1), RowSense::eq);
  for (int i = 0; i < rows_n; ++i) {
    for (int j = 0; j < vars_n; ++j) ref.A(i, j) = lp.A(i, j);
    ref.b[static_cast<std::size_t>(i)] = lp.b[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < vars_n; ++j) ref.A(rows_n, j) = lp.c[static_cast<std::size_t>(j)];
  ref.b[static_cast<std::size_t>(rows_n)] = res.value + slack;
  ref.sense[static_cast<std::size_t>(rows_n)] = RowSense::le;
  Vector root_x(final_z.begin(), final_z.begin() + n1);
  for (int j = 0; j < n1; ++j) {
    LPProblem step = ref;
    step.c.assign(static_cast<std::size_t>(vars_n), 0.0);
    step.c[static_cast<std::size_t>(j)] = 1.0;
    int extra = rows_n + 1;
    for (int l = 0; l < j; ++l, ++extra) {
      step.A(extra, l) = 1.0;
      step.b[static_cast<std::size_t>(extra)] = root_x[static_cast<std::size_t>(l)];
    }
    LPResult rr = lp_solve(step);
    if (rr.status != LPStatus::optimal) break;
    root_x[static_cast<std::size_t>(j)] = rr.x[static_cast<std::size_t>(j)];
    final_z = rr.x;
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    int t = tree.nodes[i].stage;
    int nv = t == 1 ? n1 : prob.stage(t).num_vars();
    tree.nodes[i].decision.assign(final_z.begin() + offset[i], final_z.begin() + offset[i] + nv);
  }
  tree.value = dot(lp.c, final_z);
  tree.solved = true;
  tree.infeasible = false;
  return true;
}

ProbEstimate stage_dof(const StageData& stage, const Vector& x_prev, Analytic) {
  require(static_cast<int>(x_prev.size()) == stage.B.cols, "stage_dof: dimension mismatch");
  Vector t = stage.B.multiply(x_prev);
  double p = 1.0;
  for (const Vector& ray : stage.cone.rays) {
    int j = single_component(ray);
    require(j >= 0, "stage_dof: analytic mode needs an axis-aligned cone");
    const ScalarDistribution& law = stage.b_laws[static_cast<std::size_t>(j)];
    p *= ray[static_cast<std::size_t>(j)] > 0.0 ? law.prob_ge(t[static_cast<std::size_t>(j)])
                                                : law.cdf(t[static_cast<std::size_t>(j)]);
  }
  for (const Vector& lin : stage.cone.lineality) {
    int j = single_component(lin);
    require(j >= 0, "stage_dof: analytic mode needs an axis-aligned cone");
    const ScalarDistribution& law = stage.b_laws[static_cast<std::size_t>(j)];
    // P{b_j = t_j}: only atoms contribute.
    p *= law.cdf(t[static_cast<std::size_t>(j)]) - law.prob_lt(t[static_cast<std::size_t>(j)]);
  }
  return {p, 0.0};
}

ProbEstimate stage_dof(const StageData& stage, const Vector& x_prev, const MonteCarlo& mc) {
  require(static_cast<int>(x_prev.size()) == stage.B.cols, "stage_dof: dimension mismatch");
  Vector t = stage.B.multiply(x_prev);
  Vector rhs(t.size());
  return detail::mc_probability(mc, [&](RngStream& s) {
    for (std::size_t c = 0; c < rhs.size(); ++c) rhs[c] = stage.b_laws[c].sample(s) - t[c];
    return farkas_feasible_rhs(stage.cone, rhs);
  });
}

namespace {

template <class Mode>
ProbEstimate min_path_dof_impl(const ScenarioTree& tree, int t, const Mode& mode) {
  if (!tree.solved) throw std::logic_error("min_path_dof: tree is not solved");
  if (t < 2 || t > tree.problem->horizon())
    throw std::invalid_argument("min_path_dof: stage out of range");
  const StageData& st = tree.problem->stage(t);
  auto [begin, end] = tree.nodes_at(t - 1);
  ProbEstimate best{2.0, 0.0};
  for (int i = begin; i < end; ++i) {
    ProbEstimate e;
    if constexpr (std::is_same_v<Mode, MonteCarlo>) {
      MonteCarlo node_mc = mode;
      node_mc.seed.stage_index =
          (static_cast<std::uint32_t>(t) << 16) | static_cast<std::uint32_t>(i - begin);
      e = stage_dof(st, tree.nodes[static_cast<std::size_t>(i)].decision, node_mc);
    } else {
      e = stage_dof(st, tree.nodes[static_cast<std::size_t>(i)].decision, mode);
    }
    if (e.value < best.value) best = e;
  }
  return best;
}

}  // namespace

ProbEstimate min_path_dof(const ScenarioTree& tree, int t, Analytic mode) {
  return min_path_dof_impl(tree, t, mode);
}

ProbEstimate min_path_dof(const ScenarioTree& tree, int t, const MonteCarlo& mc) {
  return min_path_dof_impl(tree, t, mc);
}

}  // namespace feaslab
