#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "feaslab/multistage.hpp"
#include "feaslab/saa.hpp"
#include "feaslab/stats.hpp"
#include "feaslab/svgplot.hpp"

namespace feaslab {

enum class ExperimentKind {
  tightness,
  bound_check,
  two_stage,
  interior_decay,
  active_constraints,
  multistage,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

struct GridSpec {
  std::vector<std::int64_t> Ns;
  std::vector<double> alphas;
};

struct TightnessCell {
  int m = 1;
  std::int64_t N = 1;
  double alpha = 0.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bound_check;
  std::string name;
  std::int64_t trials = 10000;
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::string out_dir = "out";

  GridSpec grid;                        // bound_check / two_stage
  std::vector<TightnessCell> cells;     // tightness
  std::vector<std::int64_t> Ns;         // interior_decay / active_constraints
  double alpha = 0.05;                  // active_constraints
  int j_active = 1;                     // |J|: active chains at the true optimum
  std::vector<int> branching;           // multistage
  std::vector<double> stage_alphas;     // multistage
  std::int64_t domain_M = 512;          // Monte Carlo size for the D estimate
  double solver_tol = 1e-6;

  std::shared_ptr<const StochasticProblem> problem;
  std::shared_ptr<const StochasticProblem> perturbed_problem;  // active_constraints pairing
  std::shared_ptr<const MultistageProblem> ms_problem;

  void validate() const;
};

/// One line of the per-trial CSV (records.csv). Optional fields print as
/// empty cells. All probability fields are checked into [0,1].
struct TrialRecord {
  std::string experiment;
  std::int64_t trial = 0;
  std::int64_t N = 0;
  double alpha = 0.0;
  std::optional<double> dfrak_r;
  std::optional<double> D_hat;
  std::optional<double> d_xstar;
  std::optional<double> bound_binom;
  std::optional<double> bound_chernoff;
  std::string flags;
  std::uint64_t seed = 0;

  void check() const;
};

struct SummaryRow {
  std::string experiment;
  std::int64_t N = 0;
  double alpha = 0.0;
  std::int64_t trials = 0;
  std::optional<double> p_hat;       // headline frequency of the experiment
  std::optional<double> stderr_;     // Wilson-score scale
  std::optional<double> freq_dfrak_r, se_dfrak_r;
  std::optional<double> freq_D, se_D;
  std::optional<double> freq_dxstar, se_dxstar;
  std::optional<double> bound_binom;
  std::optional<double> bound_chernoff;
  std::optional<double> bound_binom_j;  // |J|-refined curve (active_constraints)
  std::int64_t censored = 0;
  std::int64_t infeasible = 0;
};

struct TreeRecord {
  std::int64_t trial = 0;
  int t = 0;
  std::optional<double> min_path_dof;  // empty for censored trees
  std::optional<double> bound;
};

struct RunResult {
  ExperimentKind kind = ExperimentKind::bound_check;
  std::string name;
  std::vector<TrialRecord> records;
  std::vector<SummaryRow> summary;
  std::vector<TreeRecord> trees;        // multistage
  std::optional<LinearFit> decay_fit;   // interior_decay
  std::optional<double> joint_freq;     // multistage
  std::optional<double> joint_bound;
  std::vector<PlotSeries> plot;         // curves rendered into plot.svg/.dat
};

RunResult run_experiment(const ExperimentConfig& config);

/// Writes records.csv, summary.csv, plot.svg, plot.dat, and the per-kind
/// extras (trees.csv, decay_fit.csv) into out_dir. Deterministic bytes for a
/// fixed RunResult.
void write_outputs(const RunResult& result, const std::string& out_dir);

/// CSV bodies (exposed so tests can check determinism without touching disk).
std::string records_csv(const RunResult& result);
std::string summary_csv(const RunResult& result);

// Exact per-trial statistic of the tightness construction: N uniform draws
// on [0,1] reordered so segment [(k-1)/m, k/m) precedes the rest; returns
// the measure of the up-set intersection (the exact degree of feasibility).
double tightness_dfrak(std::span<const double> draws, int m);

}  // namespace feaslab
