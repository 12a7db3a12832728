#include "feaslab/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "feaslab/bounds.hpp"
#include "feaslab/csvio.hpp"
#include "feaslab/errors.hpp"
#include "feaslab/parallel.hpp"

namespace feaslab {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::int64_t branching_at(const ExperimentConfig& cfg, int t) {
  return cfg.branching.at(static_cast<std::size_t>(t - 2));
}

// Chain directions of a two-stage recourse family: extreme rays plus both
// signs of each lineality vector. The chain order m is the list size.
std::vector<Vector> recourse_directions(const ConeGenerators& cone) {
  std::vector<Vector> dirs = cone.rays;
  for (const Vector& l : cone.lineality) {
    dirs.push_back(l);
    Vector neg = l;
    for (double& e : neg) e = -e;
    dirs.push_back(std::move(neg));
  }
  return dirs;
}

int axis_component(const Vector& v) {
  int idx = -1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= 1e-12) continue;
    if (idx >= 0) return -1;
    idx = static_cast<int>(i);
  }
  return idx;
}

// d(x) for a chain problem, evaluated at the solver's returned point. The
// solvers guarantee feasibility only within a 1e-8 residual, and threshold
// laws may carry atoms exactly at the sampled chain boundary, so a chain
// value within tolerance above its sample minimum counts as sitting on it.
double chain_dof_at_solution(const ChainDomainSpec& spec, const Vector& x,
                             const Vector& minima) {
  const double tol = 1e-8;
  double p = 1.0;
  for (int k = 0; k < spec.order(); ++k) {
    const ChainLink& link = spec.chains[static_cast<std::size_t>(k)];
    double v = link.fn.eval(x);
    double mn = minima[static_cast<std::size_t>(k)];
    if (v > mn && v <= mn + tol) v = mn;
    double factor = link.law.prob_ge(v);
    if (spec.independent_thresholds)
      p *= factor;
    else
      p = std::min(p, factor);
  }
  return p;
}

std::optional<double> binom_opt(std::int64_t m, std::int64_t N, double alpha) {
  if (m < 1 || m > N) return std::nullopt;
  return binomial_tail(m, N, alpha);
}

std::optional<double> chern_opt(std::int64_t m, std::int64_t N, double alpha) {
  if (m < 1 || m > N || alpha <= 0.0) return std::nullopt;
  if (static_cast<double>(N) * alpha < static_cast<double>(m - 1)) return std::nullopt;
  return chernoff_estimate(m, N, alpha);
}

struct EventTally {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  double freq() const { return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
  double se() const {
    return total ? wilson_stderr(static_cast<std::size_t>(hits), static_cast<std::size_t>(total))
                 : 0.0;
  }
};

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::tightness: return "tightness";
    case ExperimentKind::bound_check: return "bound_check";
    case ExperimentKind::two_stage: return "two_stage";
    case ExperimentKind::interior_decay: return "interior_decay";
    case ExperimentKind::active_constraints: return "active_constraints";
    case ExperimentKind::multistage: return "multistage";
  }
  return "unknown";
}

ExperimentKind kind_from_name(const std::string& name) {
  if (name == "tightness") return ExperimentKind::tightness;
  if (name == "bound_check") return ExperimentKind::bound_check;
  if (name == "two_stage") return ExperimentKind::two_stage;
  if (name == "interior_decay") return ExperimentKind::interior_decay;
  if (name == "active_constraints") return ExperimentKind::active_constraints;
  if (name == "multistage") return ExperimentKind::multistage;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

void ExperimentConfig::validate() const {
  require(trials >= 1, "config: trials >= 1");
  require(threads >= 0, "config: threads >= 0");
  require(domain_M >= 1, "config: domain_M >= 1");
  switch (kind) {
    case ExperimentKind::tightness: {
      require(!cells.empty(), "tightness: needs cells");
      require(trials >= 100, "tightness: trials >= 100 required for a bound check");
      for (const TightnessCell& c : cells) {
        require(c.m >= 1 && c.N >= c.m, "tightness: requires 1 <= m <= N");
        require(c.alpha >= 0.0 && c.alpha <= 1.0 / c.m, "tightness: requires alpha <= 1/m");
      }
      break;
    }
    case ExperimentKind::bound_check:
    case ExperimentKind::two_stage: {
      require(problem != nullptr, "bound check: needs a problem");
      require(trials >= 100, "bound check: trials >= 100 required");
      require(!grid.Ns.empty() && !grid.alphas.empty(), "bound check: needs an (N, alpha) grid");
      std::int64_t m = 0;
      if (problem->domain) m = problem->domain->order();
      if (problem->recourse)
        m = static_cast<std::int64_t>(
            recourse_directions(enumerate_rays(problem->recourse->W)).size());
      for (std::int64_t N : grid.Ns)
        require(N >= std::max<std::int64_t>(m, 1), "bound check: every grid N must be >= m");
      for (double a : grid.alphas) require(a >= 0.0 && a <= 1.0, "bound check: alpha in [0,1]");
      if (kind == ExperimentKind::two_stage)
        require(problem->recourse.has_value(), "two_stage: problem must have recourse data");
      else
        require(problem->domain.has_value(), "bound_check: problem must have a chain domain");
      break;
    }
    case ExperimentKind::interior_decay: {
      require(problem != nullptr && problem->domain.has_value(),
              "interior_decay: needs a chain-domain problem");
      require(!Ns.empty(), "interior_decay: needs Ns");
      break;
    }
    case ExperimentKind::active_constraints: {
      require(problem != nullptr && problem->domain.has_value(),
              "active_constraints: needs a chain-domain problem");
      require(perturbed_problem != nullptr, "active_constraints: needs the perturbed pair");
      require(trials >= 100, "active_constraints: trials >= 100 required");
      require(!Ns.empty(), "active_constraints: needs Ns");
      require(alpha > 0.0 && alpha < 1.0, "active_constraints: alpha in (0,1)");
      require(j_active >= 1 && j_active <= problem->domain->order(),
              "active_constraints: j_active must lie in [1, m]");
      for (std::int64_t N : Ns)
        require(N >= problem->domain->order(), "active_constraints: N >= m required");
      break;
    }
    case ExperimentKind::multistage: {
      require(ms_problem != nullptr, "multistage: needs a problem");
      require(trials >= 100, "multistage: trials >= 100 required");
      const int T = ms_problem->horizon();
      require(T <= 4, "multistage: desk-scale cap T <= 4");
      require(static_cast<int>(branching.size()) == T - 1, "multistage: branching size T-1");
      require(static_cast<int>(stage_alphas.size()) == T - 1, "multistage: stage_alphas size T-1");
      for (int n : branching) require(n <= 50, "multistage: desk-scale cap N_t <= 50");
      for (int t = 2; t <= T; ++t) {
        auto dirs = recourse_directions(ms_problem->stage(t).cone);
        require(branching[static_cast<std::size_t>(t - 2)] >=
                    std::max<std::int64_t>(1, static_cast<std::int64_t>(dirs.size())),
                "multistage: N_t >= m_t required");
        double a = stage_alphas[static_cast<std::size_t>(t - 2)];
        require(a >= 0.0 && a <= 1.0, "multistage: alpha_t in [0,1]");
      }
      break;
    }
  }
}

void TrialRecord::check() const {
  auto ok01 = [](const std::optional<double>& v) {
    return !v.has_value() || (*v >= 0.0 && *v <= 1.0);
  };
  if (!ok01(dfrak_r) || !ok01(D_hat) || !ok01(d_xstar) || !ok01(bound_binom) ||
      !ok01(bound_chernoff))
    throw std::logic_error("TrialRecord: probability field outside [0,1]");
}

double tightness_dfrak(std::span<const double> draws, int m) {
  require(m >= 1, "tightness_dfrak: m >= 1");
  require(static_cast<int>(draws.size()) >= m, "tightness_dfrak: needs N >= m draws");
  double global_min = draws[0];
  for (double d : draws) global_min = std::min(global_min, d);

  // Interval complement of the up-set per relation; union measured by sweep.
  std::vector<std::pair<double, double>> iv;
  for (int k = 1; k <= m; ++k) {
    double lo = static_cast<double>(k - 1) / m;
    double hi = static_cast<double>(k) / m;
    double seg_min = std::numeric_limits<double>::infinity();
    for (double d : draws)
      if (d >= lo && d < hi) seg_min = std::min(seg_min, d);
    double h = std::isfinite(seg_min) ? seg_min : global_min;
    if (h >= lo && h < hi) {
      if (h > lo) iv.emplace_back(lo, h);
    } else if (h >= hi) {
      iv.emplace_back(0.0, h);
    } else {  // h < lo: everything below h plus the whole segment
      if (h > 0.0) iv.emplace_back(0.0, h);
      iv.emplace_back(lo, hi);
    }
  }
  std::sort(iv.begin(), iv.end());
  double measure = 0.0, cur_lo = 0.0, cur_hi = -1.0;
  for (auto [lo, hi] : iv) {
    if (hi <= lo) continue;
    if (cur_hi < lo) {
      if (cur_hi > cur_lo) measure += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (cur_hi > cur_lo) measure += cur_hi - cur_lo;
  return 1.0 - measure;
}

namespace {

// ---------------------------------------------------------------------------
// tightness

RunResult run_tightness(const ExperimentConfig& cfg) {
  RunResult out;
  out.kind = cfg.kind;
  out.name = cfg.name;
  const std::int64_t R = cfg.trials;
  out.records.resize(cfg.cells.size() * static_cast<std::size_t>(R));

  for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
    const TightnessCell& cell = cfg.cells[ci];
    TrialRecord* slab = out.records.data() + ci * static_cast<std::size_t>(R);
    for_each_index(R, cfg.threads, [&, slab](std::int64_t r) {
      SeedSpec seed{cfg.master_seed, static_cast<std::uint64_t>(r),
                    static_cast<std::uint32_t>(ci), StreamRole::threshold};
      RngStream s = make_stream(seed);
      std::vector<double> draws(static_cast<std::size_t>(cell.N));
      for (double& d : draws) d = s.uniform01();
      double dfrak = tightness_dfrak(draws, cell.m);
      TrialRecord rec;
      rec.experiment = kind_name(cfg.kind);
      rec.trial = r;
      rec.N = cell.N;
      rec.alpha = cell.alpha;
      rec.D_hat = dfrak;
      rec.bound_binom = binom_opt(cell.m, cell.N, cell.alpha);
      rec.bound_chernoff = chern_opt(cell.m, cell.N, cell.alpha);
      rec.seed = derive_seed(seed);
      slab[r] = std::move(rec);
    });

    EventTally tally;
    for (std::int64_t r = 0; r < R; ++r) {
      tally.total++;
      if (*slab[r].D_hat < 1.0 - cell.alpha) tally.hits++;
    }
    SummaryRow row;
    row.experiment = kind_name(cfg.kind);
    row.N = cell.N;
    row.alpha = cell.alpha;
    row.trials = R;
    row.p_hat = tally.freq();
    row.stderr_ = tally.se();
    row.bound_binom = binom_opt(cell.m, cell.N, cell.alpha);
    row.bound_chernoff = chern_opt(cell.m, cell.N, cell.alpha);
    out.summary.push_back(row);
  }

  PlotSeries p{"p_hat", "empirical P{dfrak < 1-a}", {}, {}};
  PlotSeries b{"bound_binom", "binomial tail", {}, {}};
  for (const SummaryRow& row : out.summary) {
    p.x.push_back(static_cast<double>(row.N));
    p.y.push_back(*row.p_hat);
    if (row.bound_binom) {
      b.x.push_back(static_cast<double>(row.N));
      b.y.push_back(*row.bound_binom);
    }
  }
  out.plot = {p, b};
  return out;
}

// ---------------------------------------------------------------------------
// bound_check / two_stage

struct CellStats {
  EventTally dfrak, dom, dx;
  std::int64_t infeasible = 0;
};

// Exact dfrak_r of a two-stage family when every chain direction is axis-
// aligned: per-component interval probability.
std::optional<double> two_stage_dfrak_exact(const std::vector<Vector>& dirs,
                                            const std::vector<ScalarDistribution>& laws,
                                            const Vector& dir_minima) {
  const std::size_t d = laws.size();
  Vector lo(d, -std::numeric_limits<double>::infinity());
  Vector hi(d, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    int j = axis_component(dirs[i]);
    if (j < 0) return std::nullopt;
    double s = dirs[i][static_cast<std::size_t>(j)];
    if (s > 0.0)
      lo[static_cast<std::size_t>(j)] =
          std::max(lo[static_cast<std::size_t>(j)], dir_minima[i] / s);
    else
      hi[static_cast<std::size_t>(j)] =
          std::min(hi[static_cast<std::size_t>(j)], dir_minima[i] / s);
  }
  double p = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    double plo = std::isfinite(lo[j]) ? laws[j].prob_lt(lo[j]) : 0.0;
    double phi = std::isfinite(hi[j]) ? laws[j].cdf(hi[j]) : 1.0;
    p *= std::max(0.0, phi - plo);
  }
  return p;
}

RunResult run_bound_like(const ExperimentConfig& cfg) {
  RunResult out;
  out.kind = cfg.kind;
  out.name = cfg.name;
  const StochasticProblem& prob = *cfg.problem;
  const std::int64_t R = cfg.trials;
  const bool two_stage = prob.two_stage();

  std::vector<Vector> ts_dirs;
  std::optional<StageData> ts_stage;  // reuses the stage feasibility machinery
  std::int64_t m = 0;
  if (two_stage) {
    ConeGenerators cone = enumerate_rays(prob.recourse->W);
    ts_dirs = recourse_directions(cone);
    m = static_cast<std::int64_t>(ts_dirs.size());
    Vector zero_cost(static_cast<std::size_t>(prob.recourse->W.cols), 0.0);
    ts_stage = StageData::make(2, prob.recourse->W, prob.recourse->T, prob.recourse->h_laws,
                               zero_cost);
  } else {
    m = prob.domain->order();
  }

  const std::size_t cells = cfg.grid.Ns.size() * cfg.grid.alphas.size();
  out.records.resize(cells * static_cast<std::size_t>(R));
  std::vector<CellStats> stats(cells);

  std::size_t ci = 0;
  for (std::size_t ni = 0; ni < cfg.grid.Ns.size(); ++ni) {
    for (std::size_t ai = 0; ai < cfg.grid.alphas.size(); ++ai, ++ci) {
      const std::int64_t N = cfg.grid.Ns[ni];
      const double alpha = cfg.grid.alphas[ai];
      TrialRecord* slab = out.records.data() + ci * static_cast<std::size_t>(R);
      std::vector<std::uint8_t> ev_dfrak(static_cast<std::size_t>(R), 0),
          ev_dom(static_cast<std::size_t>(R), 0), ev_dx(static_cast<std::size_t>(R), 0),
          ev_inf(static_cast<std::size_t>(R), 0), has_dx(static_cast<std::size_t>(R), 0);

      for_each_index(R, cfg.threads, [&, slab](std::int64_t r) {
        SeedSpec base{cfg.master_seed, static_cast<std::uint64_t>(r),
                      static_cast<std::uint32_t>(ci), StreamRole::threshold};
        SAAInstance inst = assemble_saa(prob, N, base);
        SeedSpec oracle = base;
        oracle.role = StreamRole::oracle;

        TrialRecord rec;
        rec.experiment = kind_name(cfg.kind);
        rec.trial = r;
        rec.N = N;
        rec.alpha = alpha;
        rec.seed = derive_seed(base);
        rec.bound_binom = binom_opt(m, N, alpha);
        rec.bound_chernoff = chern_opt(m, N, alpha);

        double dfrak_val, dom_val;
        Vector dir_minima;
        if (two_stage) {
          dir_minima.assign(ts_dirs.size(), std::numeric_limits<double>::infinity());
          for (const Vector& h : inst.h_draws)
            for (std::size_t di = 0; di < ts_dirs.size(); ++di)
              dir_minima[di] = std::min(dir_minima[di], dot(ts_dirs[di], h));
          auto exact = two_stage_dfrak_exact(ts_dirs, prob.recourse->h_laws, dir_minima);
          if (exact) {
            dfrak_val = *exact;
          } else {
            SeedSpec fallback = oracle;  // distinct stream from the D estimate
            fallback.stage_index |= 0x40000000u;
            Vector h(prob.recourse->h_laws.size());
            dfrak_val = detail::mc_probability(MonteCarlo{cfg.domain_M, fallback},
                                               [&](RngStream& s) {
                                                 for (std::size_t c = 0; c < h.size(); ++c)
                                                   h[c] = prob.recourse->h_laws[c].sample(s);
                                                 for (std::size_t di = 0; di < ts_dirs.size(); ++di)
                                                   if (dot(ts_dirs[di], h) < dir_minima[di])
                                                     return false;
                                                 return true;
                                               })
                            .value;
          }
          // Threshold-comparison estimate of D over fresh draws.
          Vector h(prob.recourse->h_laws.size());
          dom_val = detail::mc_probability(MonteCarlo{cfg.domain_M, oracle},
                                           [&](RngStream& s) {
                                             for (std::size_t c = 0; c < h.size(); ++c)
                                               h[c] = prob.recourse->h_laws[c].sample(s);
                                             for (std::size_t di = 0; di < ts_dirs.size(); ++di)
                                               if (dot(ts_dirs[di], h) < dir_minima[di])
                                                 return false;
                                             return true;
                                           })
                        .value;
        } else {
          dfrak_val = prob.domain->independent_thresholds
                          ? dfrak_r(*prob.domain, inst.thresholds, Analytic{}).value
                          : dfrak_r_comonotone_exact(*prob.domain, inst.thresholds);
          dom_val = dof_domain(*prob.domain, inst.thresholds,
                               MonteCarlo{cfg.domain_M, oracle})
                        .value;
        }
        rec.dfrak_r = dfrak_val;
        rec.D_hat = dom_val;

        SAASolution sol = two_stage ? solve_two_stage(inst) : solve_convex(inst, cfg.solver_tol);
        std::string flags;
        if (sol.saa_infeasible) {
          flags = "saa_infeasible";
          ev_inf[static_cast<std::size_t>(r)] = 1;
        } else {
          if (sol.gap_exceeded) flags = "solver_gap";
          double dx;
          if (two_stage) {
            ProbEstimate e;
            try {
              e = stage_dof(*ts_stage, sol.x, Analytic{});
            } catch (const std::invalid_argument&) {
              e = stage_dof(*ts_stage, sol.x, MonteCarlo{cfg.domain_M, oracle});
            }
            dx = e.value;
          } else {
            dx = chain_dof_at_solution(*prob.domain, sol.x, inst.thresholds.minima);
          }
          rec.d_xstar = dx;
          has_dx[static_cast<std::size_t>(r)] = 1;
          if (dx < 1.0 - alpha) ev_dx[static_cast<std::size_t>(r)] = 1;
        }
        rec.flags = flags;
        if (dfrak_val < 1.0 - alpha) ev_dfrak[static_cast<std::size_t>(r)] = 1;
        if (dom_val < 1.0 - alpha) ev_dom[static_cast<std::size_t>(r)] = 1;
        slab[r] = std::move(rec);
      });

      CellStats& cs = stats[ci];
      for (std::int64_t r = 0; r < R; ++r) {
        cs.dfrak.total++;
        cs.dfrak.hits += ev_dfrak[static_cast<std::size_t>(r)];
        cs.dom.total++;
        cs.dom.hits += ev_dom[static_cast<std::size_t>(r)];
        if (has_dx[static_cast<std::size_t>(r)]) {
          cs.dx.total++;
          cs.dx.hits += ev_dx[static_cast<std::size_t>(r)];
        }
        cs.infeasible += ev_inf[static_cast<std::size_t>(r)];
      }

      SummaryRow row;
      row.experiment = kind_name(cfg.kind);
      row.N = N;
      row.alpha = alpha;
      row.trials = R;
      row.freq_dfrak_r = cs.dfrak.freq();
      row.se_dfrak_r = cs.dfrak.se();
      row.freq_D = cs.dom.freq();
      row.se_D = cs.dom.se();
      if (cs.dx.total > 0) {
        row.freq_dxstar = cs.dx.freq();
        row.se_dxstar = cs.dx.se();
      }
      row.bound_binom = binom_opt(m, N, alpha);
      row.bound_chernoff = chern_opt(m, N, alpha);
      row.infeasible = cs.infeasible;
      out.summary.push_back(row);
    }
  }

  for (double alpha : cfg.grid.alphas) {
    auto series = [&](const char* col, auto getter) {
      PlotSeries s{col, std::string(col) + " a=" + format_double(alpha), {}, {}};
      for (const SummaryRow& row : out.summary) {
        if (row.alpha != alpha) continue;
        auto v = getter(row);
        if (!v) continue;
        s.x.push_back(static_cast<double>(row.N));
        s.y.push_back(*v);
      }
      return s;
    };
    out.plot.push_back(series("freq_dfrak_r", [](const SummaryRow& r) { return r.freq_dfrak_r; }));
    out.plot.push_back(series("freq_dxstar", [](const SummaryRow& r) { return r.freq_dxstar; }));
    out.plot.push_back(series("bound_binom", [](const SummaryRow& r) { return r.bound_binom; }));
    out.plot.push_back(
        series("bound_chernoff", [](const SummaryRow& r) { return r.bound_chernoff; }));
  }
  return out;
}

// ---------------------------------------------------------------------------
// interior_decay

RunResult run_interior_decay(const ExperimentConfig& cfg) {
  RunResult out;
  out.kind = cfg.kind;
  out.name = cfg.name;
  const StochasticProblem& prob = *cfg.problem;
  const std::int64_t R = cfg.trials;
  Vector ess = prob.domain->essential_thresholds();

  out.records.resize(cfg.Ns.size() * static_cast<std::size_t>(R));
  std::vector<double> xs, ys;
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    const std::int64_t N = cfg.Ns[ni];
    TrialRecord* slab = out.records.data() + ni * static_cast<std::size_t>(R);
    std::vector<std::uint8_t> ev(static_cast<std::size_t>(R), 0);

    for_each_index(R, cfg.threads, [&, slab](std::int64_t r) {
      SeedSpec base{cfg.master_seed, static_cast<std::uint64_t>(r),
                    static_cast<std::uint32_t>(ni), StreamRole::threshold};
      SAAInstance inst = assemble_saa(prob, N, base);
      SAASolution sol = solve_convex(inst, cfg.solver_tol);

      TrialRecord rec;
      rec.experiment = kind_name(cfg.kind);
      rec.trial = r;
      rec.N = N;
      rec.alpha = 0.0;
      rec.seed = derive_seed(base);
      if (!sol.saa_infeasible) {
        bool outside = !domain_contains(*prob.domain, sol.x, ess);
        ev[static_cast<std::size_t>(r)] = outside ? 1 : 0;
        rec.d_xstar = dof_point(*prob.domain, sol.x, Analytic{}).value;
        rec.dfrak_r = dfrak_r(*prob.domain, inst.thresholds, Analytic{}).value;
        if (sol.gap_exceeded) rec.flags = "solver_gap";
      } else {
        rec.flags = "saa_infeasible";
      }
      slab[r] = std::move(rec);
    });

    EventTally tally;
    for (std::int64_t r = 0; r < R; ++r) {
      tally.total++;
      tally.hits += ev[static_cast<std::size_t>(r)];
    }
    SummaryRow row;
    row.experiment = kind_name(cfg.kind);
    row.N = N;
    row.alpha = 0.0;
    row.trials = R;
    row.p_hat = tally.freq();
    row.stderr_ = tally.se();
    out.summary.push_back(row);
    if (tally.hits > 0) {
      xs.push_back(static_cast<double>(N));
      ys.push_back(std::log(tally.freq()));
    }
  }

  if (xs.size() >= 2) out.decay_fit = fit_line(xs, ys);

  PlotSeries p{"p_hat", "P{x* outside dom F}", {}, {}};
  for (const SummaryRow& row : out.summary) {
    p.x.push_back(static_cast<double>(row.N));
    p.y.push_back(*row.p_hat);
  }
  out.plot = {p};
  return out;
}

// ---------------------------------------------------------------------------
// active_constraints

RunResult run_active(const ExperimentConfig& cfg) {
  RunResult out;
  out.kind = cfg.kind;
  out.name = cfg.name;
  const std::int64_t R = cfg.trials;
  const double alpha = cfg.alpha;
  const std::array<const StochasticProblem*, 2> probs{cfg.problem.get(),
                                                      cfg.perturbed_problem.get()};
  const std::array<const char*, 2> label{"active_constraints", "active_constraints_perturbed"};
  const std::int64_t m = cfg.problem->domain->order();

  out.records.resize(cfg.Ns.size() * 2 * static_cast<std::size_t>(R));
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    const std::int64_t N = cfg.Ns[ni];
    for (int v = 0; v < 2; ++v) {
      TrialRecord* slab =
          out.records.data() + (ni * 2 + static_cast<std::size_t>(v)) * static_cast<std::size_t>(R);
      std::vector<std::uint8_t> ev(static_cast<std::size_t>(R), 0);
      const StochasticProblem& prob = *probs[static_cast<std::size_t>(v)];

      for_each_index(R, cfg.threads, [&, slab](std::int64_t r) {
        // Paired seeds: the perturbed variant reuses the same streams.
        SeedSpec base{cfg.master_seed, static_cast<std::uint64_t>(r),
                      static_cast<std::uint32_t>(ni), StreamRole::threshold};
        SAAInstance inst = assemble_saa(prob, N, base);
        SAASolution sol = solve_convex(inst, cfg.solver_tol);

        TrialRecord rec;
        rec.experiment = label[static_cast<std::size_t>(v)];
        rec.trial = r;
        rec.N = N;
        rec.alpha = alpha;
        rec.seed = derive_seed(base);
        rec.bound_binom = binom_opt(m, N, alpha);
        rec.bound_chernoff = chern_opt(m, N, alpha);
        if (!sol.saa_infeasible) {
          double dx = chain_dof_at_solution(*prob.domain, sol.x, inst.thresholds.minima);
          rec.d_xstar = dx;
          ev[static_cast<std::size_t>(r)] = dx < 1.0 - alpha ? 1 : 0;
          if (sol.gap_exceeded) rec.flags = "solver_gap";
        } else {
          rec.flags = "saa_infeasible";
        }
        slab[r] = std::move(rec);
      });

      EventTally tally;
      for (std::int64_t r = 0; r < R; ++r) {
        tally.total++;
        tally.hits += ev[static_cast<std::size_t>(r)];
      }
      SummaryRow row;
      row.experiment = label[static_cast<std::size_t>(v)];
      row.N = N;
      row.alpha = alpha;
      row.trials = R;
      row.p_hat = tally.freq();
      row.stderr_ = tally.se();
      row.freq_dxstar = tally.freq();
      row.se_dxstar = tally.se();
      row.bound_binom = binom_opt(m, N, alpha);
      row.bound_binom_j = binom_opt(cfg.j_active, N, alpha);
      row.bound_chernoff = chern_opt(cfg.j_active, N, alpha);
      out.summary.push_back(row);
    }
  }

  for (int v = 0; v < 2; ++v) {
    PlotSeries s{"p_hat", std::string(label[static_cast<std::size_t>(v)]), {}, {}};
    for (const SummaryRow& row : out.summary) {
      if (row.experiment != label[static_cast<std::size_t>(v)]) continue;
      s.x.push_back(static_cast<double>(row.N));
      s.y.push_back(*row.p_hat);
    }
    out.plot.push_back(std::move(s));
  }
  PlotSeries bj{"bound_binom_j", "binomial tail |J|", {}, {}};
  PlotSeries bm{"bound_binom", "binomial tail m", {}, {}};
  for (const SummaryRow& row : out.summary) {
    if (row.experiment != label[0]) continue;
    bj.x.push_back(static_cast<double>(row.N));
    bj.y.push_back(*row.bound_binom_j);
    bm.x.push_back(static_cast<double>(row.N));
    bm.y.push_back(*row.bound_binom);
  }
  out.plot.push_back(std::move(bj));
  out.plot.push_back(std::move(bm));
  return out;
}

// ---------------------------------------------------------------------------
// multistage

RunResult run_multistage_exp(const ExperimentConfig& cfg) {
  RunResult out;
  out.kind = cfg.kind;
  out.name = cfg.name;
  const MultistageProblem& prob = *cfg.ms_problem;
  const int T = prob.horizon();
  const std::int64_t R = cfg.trials;

  std::vector<std::int64_t> m_t(static_cast<std::size_t>(T - 1));
  std::vector<BoundInput> product_inputs;
  for (int t = 2; t <= T; ++t) {
    m_t[static_cast<std::size_t>(t - 2)] =
        static_cast<std::int64_t>(recourse_directions(prob.stage(t).cone).size());
    product_inputs.push_back(BoundInput{m_t[static_cast<std::size_t>(t - 2)],
                                        static_cast<std::int64_t>(branching_at(cfg, t)),
                                        cfg.stage_alphas[static_cast<std::size_t>(t - 2)]});
  }

  struct TreeOutcome {
    bool censored = false;
    std::vector<double> mpd;  // per stage t=2..T
  };
  std::vector<TreeOutcome> outcomes(static_cast<std::size_t>(R));

  for_each_index(R, cfg.threads, [&](std::int64_t r) {
    SeedSpec base{cfg.master_seed, static_cast<std::uint64_t>(r), 0, StreamRole::threshold};
    ScenarioTree tree = build_tree(prob, cfg.branching, base);
    TreeOutcome& oc = outcomes[static_cast<std::size_t>(r)];
    if (!solve_tree(tree)) {
      oc.censored = true;
      return;
    }
    oc.mpd.resize(static_cast<std::size_t>(T - 1));
    for (int t = 2; t <= T; ++t) {
      ProbEstimate e;
      try {
        e = min_path_dof(tree, t, Analytic{});
      } catch (const std::invalid_argument&) {
        SeedSpec oracle = base;
        oracle.role = StreamRole::oracle;
        e = min_path_dof(tree, t, MonteCarlo{cfg.domain_M, oracle});
      }
      oc.mpd[static_cast<std::size_t>(t - 2)] = e.value;
    }
  });

  std::int64_t censored = 0, joint_hits = 0, solved = 0;
  std::vector<EventTally> stage_tally(static_cast<std::size_t>(T - 1));
  out.records.reserve(static_cast<std::size_t>(R) * (T - 1));
  out.trees.reserve(static_cast<std::size_t>(R) * (T - 1));
  for (std::int64_t r = 0; r < R; ++r) {
    const TreeOutcome& oc = outcomes[static_cast<std::size_t>(r)];
    SeedSpec base{cfg.master_seed, static_cast<std::uint64_t>(r), 0, StreamRole::threshold};
    if (oc.censored) ++censored; else ++solved;
    bool joint = !oc.censored;
    for (int t = 2; t <= T; ++t) {
      double a = cfg.stage_alphas[static_cast<std::size_t>(t - 2)];
      std::int64_t Nt = branching_at(cfg, t);
      auto bound = binom_opt(m_t[static_cast<std::size_t>(t - 2)], Nt, a);
      TrialRecord rec;
      rec.experiment = kind_name(cfg.kind);
      rec.trial = r;
      rec.N = Nt;
      rec.alpha = a;
      rec.bound_binom = bound;
      rec.bound_chernoff = chern_opt(m_t[static_cast<std::size_t>(t - 2)], Nt, a);
      rec.seed = derive_seed(base);
      TreeRecord tr{r, t, std::nullopt, bound};
      if (oc.censored) {
        rec.flags = "censored";
      } else {
        double v = oc.mpd[static_cast<std::size_t>(t - 2)];
        rec.d_xstar = v;
        tr.min_path_dof = v;
        stage_tally[static_cast<std::size_t>(t - 2)].total++;
        if (v < 1.0 - a) {
          stage_tally[static_cast<std::size_t>(t - 2)].hits++;
          joint = false;
        }
      }
      out.records.push_back(std::move(rec));
      out.trees.push_back(tr);
    }
    if (joint) ++joint_hits;
  }

  for (int t = 2; t <= T; ++t) {
    const EventTally& tally = stage_tally[static_cast<std::size_t>(t - 2)];
    SummaryRow row;
    row.experiment = "multistage_stage" + std::to_string(t);
    row.N = branching_at(cfg, t);
    row.alpha = cfg.stage_alphas[static_cast<std::size_t>(t - 2)];
    row.trials = tally.total;
    row.p_hat = tally.freq();
    row.stderr_ = tally.se();
    row.bound_binom = binom_opt(m_t[static_cast<std::size_t>(t - 2)], row.N, row.alpha);
    row.bound_chernoff = chern_opt(m_t[static_cast<std::size_t>(t - 2)], row.N, row.alpha);
    row.censored = censored;
    out.summary.push_back(row);
  }
  double product = multistage_product(product_inputs);
  out.joint_bound = product;
  out.joint_freq = solved > 0 ? static_cast<double>(joint_hits) / static_cast<double>(solved) : 0.0;
  SummaryRow joint_row;
  joint_row.experiment = "multistage_joint";
  joint_row.N = 0;
  joint_row.alpha = 0.0;
  joint_row.trials = solved;
  joint_row.p_hat = out.joint_freq;
  joint_row.stderr_ = solved > 0 ? wilson_stderr(static_cast<std::size_t>(joint_hits),
                                                 static_cast<std::size_t>(solved))
                                 : 0.0;
  joint_row.bound_binom = product;
  joint_row.censored = censored;
  out.summary.push_back(joint_row);

  PlotSeries p{"p_hat", "P{min path dof < 1-a}", {}, {}};
  PlotSeries b{"bound_binom", "binomial tail", {}, {}};
  for (int t = 2; t <= T; ++t) {
    const SummaryRow& row = out.summary[static_cast<std::size_t>(t - 2)];
    p.x.push_back(static_cast<double>(t));
    if (row.p_hat) p.y.push_back(*row.p_hat);
    b.x.push_back(static_cast<double>(t));
    if (row.bound_binom) b.y.push_back(*row.bound_binom);
  }
  out.plot = {p, b};
  return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunResult out;
  switch (config.kind) {
    case ExperimentKind::tightness:
      out = run_tightness(config);
      break;
    case ExperimentKind::bound_check:
    case ExperimentKind::two_stage:
      out = run_bound_like(config);
      break;
    case ExperimentKind::interior_decay:
      out = run_interior_decay(config);
      break;
    case ExperimentKind::active_constraints:
      out = run_active(config);
      break;
    case ExperimentKind::multistage:
      out = run_multistage_exp(config);
      break;
  }
  for (const TrialRecord& rec : out.records) rec.check();
  return out;
}

std::string records_csv(const RunResult& result) {
  CsvWriter w({"experiment", "trial", "N", "alpha", "dfrak_r", "D_hat", "d_xstar", "bound_binom",
               "bound_chernoff", "flags", "seed"});
  char seed_hex[19];
  for (const TrialRecord& r : result.records) {
    std::snprintf(seed_hex, sizeof(seed_hex), "%016llx",
                  static_cast<unsigned long long>(r.seed));
    w.add_row({r.experiment, std::to_string(r.trial), std::to_string(r.N), format_double(r.alpha),
               format_field(r.dfrak_r), format_field(r.D_hat), format_field(r.d_xstar),
               format_field(r.bound_binom), format_field(r.bound_chernoff), r.flags, seed_hex});
  }
  return w.to_string();
}

std::string summary_csv(const RunResult& result) {
  CsvWriter w({"experiment", "N", "alpha", "trials", "p_hat", "stderr", "freq_dfrak_r",
               "se_dfrak_r", "freq_D", "se_D", "freq_dxstar", "se_dxstar", "bound_binom",
               "bound_chernoff", "bound_binom_j", "censored", "infeasible"});
  for (const SummaryRow& r : result.summary) {
    w.add_row({r.experiment, std::to_string(r.N), format_double(r.alpha),
               std::to_string(r.trials), format_field(r.p_hat), format_field(r.stderr_),
               format_field(r.freq_dfrak_r), format_field(r.se_dfrak_r), format_field(r.freq_D),
               format_field(r.se_D), format_field(r.freq_dxstar), format_field(r.se_dxstar),
               format_field(r.bound_binom), format_field(r.bound_chernoff),
               format_field(r.bound_binom_j), std::to_string(r.censored),
               std::to_string(r.infeasible)});
  }
  return w.to_string();
}

void write_outputs(const RunResult& result, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  auto write = [&](const std::string& name, const std::string& body) {
    std::string path = out_dir + "/" + name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw IoError("write failed: " + path);
  };

  write("records.csv", records_csv(result));
  write("summary.csv", summary_csv(result));
  write_plot(out_dir + "/plot.svg", out_dir + "/plot.dat", result.name, "N", result.plot);

  if (result.kind == ExperimentKind::multistage) {
    CsvWriter w({"trial", "t", "min_path_dof", "bound"});
    for (const TreeRecord& t : result.trees)
      w.add_row({std::to_string(t.trial), std::to_string(t.t), format_field(t.min_path_dof),
                 format_field(t.bound)});
    write("trees.csv", w.to_string());
  }
  if (result.kind == ExperimentKind::interior_decay) {
    CsvWriter w({"experiment", "slope", "intercept", "r2", "points"});
    if (result.decay_fit) {
      w.add_row({result.name, format_double(result.decay_fit->slope),
                 format_double(result.decay_fit->intercept), format_double(result.decay_fit->r2),
                 std::to_string(result.decay_fit->points)});
    }
    write("decay_fit.csv", w.to_string());
  }
}

}  // namespace feaslab
