#pragma once

#include <cstdint>
#include <vector>

#include "feaslab/cone.hpp"
#include "feaslab/distribution.hpp"
#include "feaslab/linalg.hpp"
#include "feaslab/mc.hpp"
#include "feaslab/rng.hpp"
#include "feaslab/stats.hpp"

namespace feaslab {

/// Deterministic first stage {x >= 0 : A x = b} with linear cost.
struct FirstStage {
  Matrix A;
  Vector b;
  Vector cost;
  int num_vars() const { return A.cols; }
};

/// Stage t >= 2 data: X_t(x_prev, xi) = {x >= 0 : A x + B x_prev = b_xi},
/// components of b drawn independently from b_laws. The cone of
/// {r : r'A >= 0} is enumerated once at construction.
struct StageData {
  int t = 2;
  Matrix A;
  Matrix B;
  std::vector<ScalarDistribution> b_laws;
  Vector cost;
  ConeGenerators cone;

  static StageData make(int t, Matrix A, Matrix B, std::vector<ScalarDistribution> b_laws,
                        Vector cost);
  int num_vars() const { return A.cols; }
  int num_rows() const { return A.rows; }
};

struct MultistageProblem {
  FirstStage first;
  std::vector<StageData> stages;  // stages[s] holds t = s + 2

  int horizon() const { return static_cast<int>(stages.size()) + 1; }
  const StageData& stage(int t) const { return stages.at(static_cast<std::size_t>(t - 2)); }
  void validate() const;
};

/// Scenario tree from identical conditional sampling: every stage-(t-1) node
/// branches to the same N_t stage-t samples, so nodes are paths and the path
/// count at stage t is prod_{s<=t} N_s.
struct ScenarioTree {
  struct Node {
    int stage = 1;
    int parent = -1;
    int sample = -1;  // index into stage_samples[stage-2]
    Vector decision;  // filled by solve_tree
  };

  const MultistageProblem* problem = nullptr;
  std::vector<int> branching;                      // N_2 .. N_T
  std::vector<std::vector<Vector>> stage_samples;  // [t-2][i] -> b realization
  std::vector<Node> nodes;                         // BFS order, root first
  std::vector<std::pair<int, int>> stage_range;    // [t-1] -> node index range

  bool solved = false;
  bool infeasible = false;
  double value = 0.0;

  std::int64_t path_count(int t) const;
  std::pair<int, int> nodes_at(int t) const { return stage_range.at(static_cast<std::size_t>(t - 1)); }
};

/// Same seed, same tree: sampling is keyed by (seed, stage).
ScenarioTree build_tree(const MultistageProblem& problem, const std::vector<int>& branching,
                        const SeedSpec& seed);

/// Extensive-form LP over all tree nodes (one decision vector per node,
/// nonanticipativity by construction), followed by lexicographic refinement
/// of the root decision among optima. Returns false when the extensive form
/// is infeasible (the tree is censored); throws SolverError when unbounded.
bool solve_tree(ScenarioTree& tree);

/// d_t(x_prev) = P{xi_t : X_t(x_prev, xi_t) is nonempty}. The analytic mode
/// requires an axis-aligned cone (every ray and lineality vector touches a
/// single component); otherwise use Monte Carlo.
ProbEstimate stage_dof(const StageData& stage, const Vector& x_prev, Analytic);
ProbEstimate stage_dof(const StageData& stage, const Vector& x_prev, const MonteCarlo& mc);

/// min over stage-(t-1) nodes of stage_dof at their stored decisions.
ProbEstimate min_path_dof(const ScenarioTree& tree, int t, Analytic);
ProbEstimate min_path_dof(const ScenarioTree& tree, int t, const MonteCarlo& mc);

}  // namespace feaslab
