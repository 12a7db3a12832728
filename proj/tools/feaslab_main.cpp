#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>

#include "feaslab/bounds.hpp"
#include "feaslab/catalog.hpp"
#include "feaslab/cone.hpp"
#include "feaslab/errors.hpp"
#include "feaslab/experiments.hpp"
#include "feaslab/json_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

int cmd_run(const std::string& config_path, const std::string& out_override,
            std::uint64_t seed_override, bool has_seed, int threads_override) {
  feaslab::ExperimentConfig cfg = feaslab::load_config_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (has_seed) cfg.master_seed = seed_override;
  if (threads_override > 0) cfg.threads = threads_override;
  cfg.validate();

  feaslab::RunResult result = feaslab::run_experiment(cfg);
  feaslab::write_outputs(result, cfg.out_dir);

  std::cout << "experiment: " << feaslab::kind_name(cfg.kind) << " (" << cfg.name << ")\n";
  std::cout << "trials: " << cfg.trials << "  seed: " << cfg.master_seed
            << "  threads: " << cfg.threads << "\n";
  for (const feaslab::SummaryRow& row : result.summary) {
    std::cout << "  " << row.experiment << " N=" << row.N << " alpha=" << row.alpha;
    if (row.p_hat) std::cout << " p_hat=" << *row.p_hat;
    if (row.freq_dfrak_r) std::cout << " freq_dfrak_r=" << *row.freq_dfrak_r;
    if (row.freq_dxstar) std::cout << " freq_dxstar=" << *row.freq_dxstar;
    if (row.bound_binom) std::cout << " bound=" << *row.bound_binom;
    std::cout << "\n";
  }
  if (result.decay_fit)
    std::cout << "  decay fit: slope=" << result.decay_fit->slope
              << " r2=" << result.decay_fit->r2 << "\n";
  if (result.joint_freq)
    std::cout << "  joint frequency=" << *result.joint_freq
              << " product bound=" << *result.joint_bound << "\n";
  std::cout << "outputs written to " << cfg.out_dir << "\n";
  return kExitOk;
}

int cmd_bounds(std::int64_t m, std::int64_t N, double alpha) {
  double tail = feaslab::binomial_tail(m, N, alpha);
  std::cout << "binomial_tail(m=" << m << ", N=" << N << ", alpha=" << alpha << ") = " << tail
            << "\n";
  if (alpha > 0.0 && static_cast<double>(N) * alpha >= static_cast<double>(m - 1)) {
    std::cout << "chernoff_estimate = " << feaslab::chernoff_estimate(m, N, alpha) << "\n";
  } else {
    std::cout << "chernoff_estimate = (undefined: requires N*alpha >= m-1 and alpha > 0)\n";
  }
  return kExitOk;
}

int cmd_rays(const std::string& matrix_path) {
  std::ifstream f(matrix_path);
  if (!f) throw feaslab::IoError("cannot open matrix file: " + matrix_path);
  feaslab::json j;
  try {
    f >> j;
  } catch (const feaslab::json::parse_error& e) {
    throw feaslab::ConfigError(std::string("matrix parse error: ") + e.what());
  }
  feaslab::Matrix W;
  try {
    W = feaslab::matrix_from_json(j.contains("W") ? j["W"] : j);
  } catch (const feaslab::ConfigError&) {
    throw;
  }
  feaslab::ConeGenerators gen = feaslab::enumerate_rays(W);
  std::cout << "cone {a : a'W >= 0} with W " << W.rows << "x" << W.cols << "\n";
  std::cout << "extreme rays: " << gen.rays.size() << "\n";
  for (const auto& r : gen.rays) {
    std::cout << "  [";
    for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? ", " : "") << r[i];
    std::cout << "]\n";
  }
  std::cout << "lineality dimension: " << gen.lineality.size() << "\n";
  for (const auto& l : gen.lineality) {
    std::cout << "  [";
    for (std::size_t i = 0; i < l.size(); ++i) std::cout << (i ? ", " : "") << l[i];
    std::cout << "]\n";
  }
  if (gen.complete_recourse()) std::cout << "cone is {0}: complete recourse\n";
  return kExitOk;
}

int cmd_catalog() {
  std::cout << "built-in problems:\n";
  for (const auto& name : feaslab::catalog_problem_names()) std::cout << "  " << name << "\n";
  std::cout << "built-in multistage problems:\n";
  for (const auto& name : feaslab::catalog_multistage_names())
    std::cout << "  " << name << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feaslab: feasibility experiments for sample average approximation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, matrix_path;
  std::uint64_t seed = 0;
  std::int64_t m = 1, N = 1;
  double alpha = 0.1;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "master seed (overrides config)");
  run->add_option("--threads", threads, "worker threads (overrides config)");

  CLI::App* bounds = app.add_subcommand("bounds", "evaluate the probability bounds");
  bounds->add_option("--m", m, "chain order")->required();
  bounds->add_option("--n", N, "sample size")->required();
  bounds->add_option("--alpha", alpha, "threshold")->required();

  CLI::App* rays = app.add_subcommand("rays", "enumerate extreme rays of {a : a'W >= 0}");
  rays->add_option("--matrix", matrix_path, "JSON file with W as nested arrays")->required();

  CLI::App* cat = app.add_subcommand("catalog", "list the built-in problem instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, seed_opt->count() > 0, threads);
    if (bounds->parsed()) return cmd_bounds(m, N, alpha);
    if (rays->parsed()) return cmd_rays(matrix_path);
    if (cat->parsed()) return cmd_catalog();
  } catch (const feaslab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const feaslab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const feaslab::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
