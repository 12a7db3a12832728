// Timing comparison between the serial reference loops and the OpenMP
// kernels. Both paths produce identical results by construction; this tool
// reports throughput and the achieved speedup.

#include <chrono>
#include <cstdio>
#include <string>

#include <omp.h>

#include "feaslab/catalog.hpp"
#include "feaslab/chain_domain.hpp"
#include "feaslab/experiments.hpp"

using namespace feaslab;

namespace {

double run_timed(ExperimentConfig cfg, int threads, std::string* digest) {
  cfg.threads = threads;
  auto t0 = std::chrono::steady_clock::now();
  RunResult res = run_experiment(cfg);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  *digest = records_csv(res);
  return secs;
}

void bench_case(const char* name, const ExperimentConfig& cfg) {
  std::string serial_digest, parallel_digest;
  int threads = omp_get_max_threads();
  double serial = run_timed(cfg, 1, &serial_digest);
  double parallel = run_timed(cfg, threads, &parallel_digest);
  bool identical = serial_digest == parallel_digest;
  std::printf("%-24s serial %7.3fs | %d threads %7.3fs | speedup %4.2fx | outputs %s\n", name,
              serial, threads, parallel, serial / parallel,
              identical ? "identical" : "DIFFER");
}

}  // namespace

int main() {
  std::printf("feaslab benchmark: serial reference vs OpenMP kernels (%d threads available)\n",
              omp_get_max_threads());

  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::tightness;
    cfg.name = "bench_tightness";
    cfg.cells = {{3, 30, 0.1}};
    cfg.trials = 200000;
    cfg.master_seed = 7;
    bench_case("tightness m=3 N=30", cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::bound_check;
    cfg.name = "bench_bound_check";
    cfg.problem = catalog_problem("m4_indep_mixed");
    cfg.grid.Ns = {50, 200};
    cfg.grid.alphas = {0.05, 0.2};
    cfg.trials = 4000;
    cfg.master_seed = 7;
    cfg.domain_M = 512;
    bench_case("bound_check m=4", cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::multistage;
    cfg.name = "bench_multistage";
    cfg.ms_problem = catalog_multistage("multistage_t3");
    cfg.branching = {8, 8};
    cfg.stage_alphas = {0.1, 0.1};
    cfg.trials = 150;
    cfg.master_seed = 7;
    bench_case("multistage T=3", cfg);
  }
  return 0;
}
