#include "feaslab/saa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "feaslab/errors.hpp"
#include "feaslab/lp.hpp"

namespace feaslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// <=-rows over the x variables only.
struct RowSet {
  std::vector<Vector> rows;
  Vector rhs;
  void add(Vector row, double b) {
    rows.push_back(std::move(row));
    rhs.push_back(b);
  }
};

// Deterministic affine part of the SAA domain: X rows, affine chains at the
// per-chain sample minima, and recourse ray rows for every scenario.
RowSet affine_saa_rows(const SAAInstance& inst) {
  const StochasticProblem& p = *inst.problem;
  RowSet rs;
  if (p.x_ineq) {
    for (int i = 0; i < p.x_ineq->G.rows; ++i) {
      Vector row(static_cast<std::size_t>(p.dim));
      for (int j = 0; j < p.dim; ++j) row[static_cast<std::size_t>(j)] = p.x_ineq->G(i, j);
      rs.add(std::move(row), p.x_ineq->g[static_cast<std::size_t>(i)]);
    }
  }
  if (p.domain) {
    for (int k = 0; k < p.domain->order(); ++k) {
      const ConstraintFn& fn = p.domain->chains[static_cast<std::size_t>(k)].fn;
      if (!fn.is_affine()) continue;
      rs.add(fn.linear_part(),
             inst.thresholds.minima[static_cast<std::size_t>(k)] - fn.constant_part());
    }
  }
  if (p.recourse) {
    const Matrix& T = p.recourse->T;
    for (const Vector& r : inst.recourse_cone.rays) {
      Vector row = T.multiply_transposed(r);  // (r'T) x <= r'h_i
      for (const Vector& h : inst.h_draws) rs.add(row, dot(r, h));
    }
    for (const Vector& l : inst.recourse_cone.lineality) {
      Vector row = T.multiply_transposed(l);  // l'(h - Tx) = 0 as two rows
      Vector neg = row;
      for (double& e : neg) e = -e;
      for (const Vector& h : inst.h_draws) {
        rs.add(row, dot(l, h));
        rs.add(neg, -dot(l, h));
      }
    }
  }
  return rs;
}

// Nonlinear chain constraints as (fn, rhs) pairs at the sample minima.
struct NonlinearSet {
  std::vector<const ConstraintFn*> fns;
  Vector rhs;
};

NonlinearSet nonlinear_saa_constraints(const SAAInstance& inst) {
  NonlinearSet ns;
  const StochasticProblem& p = *inst.problem;
  if (p.domain) {
    for (int k = 0; k < p.domain->order(); ++k) {
      const ConstraintFn& fn = p.domain->chains[static_cast<std::size_t>(k)].fn;
      if (fn.is_affine()) continue;
      ns.fns.push_back(&fn);
      ns.rhs.push_back(inst.thresholds.minima[static_cast<std::size_t>(k)]);
    }
  }
  return ns;
}

double max_violation(const SAAInstance& inst, const RowSet& rows, const NonlinearSet& nl,
                     std::span<const double> x) {
  const StochasticProblem& p = *inst.problem;
  double v = 0.0;
  for (int j = 0; j < p.dim; ++j) {
    v = std::max(v, p.box.lo[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]);
    v = std::max(v, x[static_cast<std::size_t>(j)] - p.box.hi[static_cast<std::size_t>(j)]);
  }
  for (std::size_t i = 0; i < rows.rows.size(); ++i)
    v = std::max(v, dot(rows.rows[i], x) - rows.rhs[i]);
  for (std::size_t k = 0; k < nl.fns.size(); ++k)
    v = std::max(v, nl.fns[k]->eval(x) - nl.rhs[k]);
  return v;
}

}  // namespace

void BoxSet::validate() const {
  require(!lo.empty() && lo.size() == hi.size(), "BoxSet: empty or mismatched bounds");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    require(std::isfinite(lo[i]) && std::isfinite(hi[i]), "BoxSet: bounds must be finite");
    require(lo[i] <= hi[i], "BoxSet: lo > hi");
  }
}

Vector BoxSet::center() const {
  Vector c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

void ObjectiveSpec::validate(int dim) const {
  switch (kind) {
    case Kind::linear:
      require(static_cast<int>(c.size()) == dim, "objective: linear c dimension mismatch");
      break;
    case Kind::quadratic_diag:
      require(static_cast<int>(weights.size()) == dim && static_cast<int>(center.size()) == dim,
              "objective: quadratic weights/center dimension mismatch");
      for (double w : weights) require(w >= 0.0, "objective: quadratic weights must be >= 0");
      break;
    case Kind::abs_deviation:
    case Kind::scaled_linear:
      require(static_cast<int>(a.size()) == dim, "objective: direction dimension mismatch");
      require(law.has_value(), "objective: sampled kind needs a law");
      break;
    case Kind::linear_abs:
      require(static_cast<int>(c.size()) == dim && static_cast<int>(a.size()) == dim,
              "objective: linear_abs dimension mismatch");
      require(law.has_value(), "objective: sampled kind needs a law");
      break;
  }
}

double ObjectiveSpec::term_value(std::span<const double> x, double draw) const {
  switch (kind) {
    case Kind::linear:
      return dot(c, x);
    case Kind::quadratic_diag: {
      double s = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        double d = x[i] - center[i];
        s += weights[i] * d * d;
      }
      return s;
    }
    case Kind::abs_deviation:
      return std::abs(dot(a, x) - draw);
    case Kind::scaled_linear:
      return draw * dot(a, x);
    case Kind::linear_abs:
      return dot(c, x) + std::abs(dot(a, x) - draw);
  }
  return 0.0;
}

Vector ObjectiveSpec::term_subgradient(std::span<const double> x, double draw) const {
  switch (kind) {
    case Kind::linear:
      return c;
    case Kind::quadratic_diag: {
      Vector g(weights.size());
      for (std::size_t i = 0; i < weights.size(); ++i)
        g[i] = 2.0 * weights[i] * (x[i] - center[i]);
      return g;
    }
    case Kind::abs_deviation: {
      double r = dot(a, x) - draw;
      double s = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      Vector g = a;
      for (double& e : g) e *= s;
      return g;
    }
    case Kind::scaled_linear: {
      Vector g = a;
      for (double& e : g) e *= draw;
      return g;
    }
    case Kind::linear_abs: {
      double r = dot(a, x) - draw;
      double s = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      Vector g = c;
      axpy(s, a, g);
      return g;
    }
  }
  return {};
}

namespace {

// E|t - X| for the laws with a convenient closed form.
std::optional<double> mean_abs_deviation(const ScalarDistribution& law, double t) {
  if (law.family() == DistFamily::uniform) {
    double lo = law.param_a(), hi = law.param_b();
    if (t <= lo) return 0.5 * (lo + hi) - t;
    if (t >= hi) return t - 0.5 * (lo + hi);
    return ((t - lo) * (t - lo) + (hi - t) * (hi - t)) / (2.0 * (hi - lo));
  }
  if (law.family() == DistFamily::discrete) {
    double s = 0.0;
    for (std::size_t i = 0; i < law.atoms().size(); ++i)
      s += law.atom_probs()[i] * std::abs(t - law.atoms()[i]);
    return s;
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> ObjectiveSpec::expectation(std::span<const double> x) const {
  switch (kind) {
    case Kind::linear:
    case Kind::quadratic_diag:
      return term_value(x, 0.0);
    case Kind::scaled_linear:
      return law->mean() * dot(a, x);
    case Kind::abs_deviation:
      return mean_abs_deviation(*law, dot(a, x));
    case Kind::linear_abs: {
      auto m = mean_abs_deviation(*law, dot(a, x));
      if (!m) return std::nullopt;
      return dot(c, x) + *m;
    }
  }
  return std::nullopt;
}

void StochasticProblem::validate() const {
  require(dim >= 1, "StochasticProblem: dim >= 1");
  box.validate();
  require(box.dim() == dim, "StochasticProblem: box dimension mismatch");
  if (x_ineq) {
    require(x_ineq->G.cols == dim && x_ineq->G.rows == static_cast<int>(x_ineq->g.size()),
            "StochasticProblem: affine X rows mismatch");
  }
  require(!(domain && recourse), "StochasticProblem: chain domain and recourse are exclusive");
  if (recourse) {
    require(static_cast<int>(recourse->c.size()) == dim, "two-stage: c dimension mismatch");
    require(recourse->W.rows == recourse->T.rows, "two-stage: W/T row mismatch");
    require(recourse->T.cols == dim, "two-stage: T column mismatch");
    require(static_cast<int>(recourse->g.size()) == recourse->W.cols,
            "two-stage: g dimension mismatch");
    require(static_cast<int>(recourse->h_laws.size()) == recourse->W.rows,
            "two-stage: h law count mismatch");
  } else {
    objective.validate(dim);
  }
  if (domain) {
    domain->validate();
    require(domain->dim == dim, "StochasticProblem: domain dimension mismatch");
    // Standing assumption: dom F meets X.
    std::vector<const ConstraintFn*> fns;
    for (const ChainLink& link : domain->chains) fns.push_back(&link.fn);
    Vector ess = domain->essential_thresholds();
    if (!find_feasible_point(box, x_ineq, fns, ess))
      throw std::invalid_argument("StochasticProblem: dom F does not intersect X");
  }
}

double SAAInstance::objective_value(std::span<const double> x) const {
  const StochasticProblem& p = *problem;
  if (p.recourse) {
    Vector xx(x.begin(), x.end());
    double s = dot(p.recourse->c, x);
    KahanSum avg;
    for (const Vector& h : h_draws) {
      double v = second_stage_value(p.recourse->W, p.recourse->T, h, p.recourse->g, xx);
      if (v == kInf) return kInf;
      avg.add(v);
    }
    return s + avg.value() / static_cast<double>(N);
  }
  if (!p.objective.sampled()) return p.objective.term_value(x, 0.0);
  KahanSum s;
  for (double d : objective_draws) s.add(p.objective.term_value(x, d));
  return s.value() / static_cast<double>(N);
}

Vector SAAInstance::objective_subgradient(std::span<const double> x) const {
  const StochasticProblem& p = *problem;
  if (p.recourse) {
    Vector xx(x.begin(), x.end());
    Vector g = p.recourse->c;
    for (const Vector& h : h_draws) {
      SecondStageEval ev = second_stage_eval(p.recourse->W, p.recourse->T, h, p.recourse->g, xx);
      if (!ev.feasible) throw SolverError("objective_subgradient: infeasible second stage");
      axpy(1.0 / static_cast<double>(N), ev.subgradient, g);
    }
    return g;
  }
  if (!p.objective.sampled()) return p.objective.term_subgradient(x, 0.0);
  Vector g(static_cast<std::size_t>(p.dim), 0.0);
  for (double d : objective_draws)
    axpy(1.0 / static_cast<double>(N), p.objective.term_subgradient(x, d), g);
  return g;
}

SAAInstance assemble_saa(const StochasticProblem& problem, std::int64_t N,
                         const SeedSpec& seed) {
  require(N >= 1, "assemble_saa: N >= 1 required");
  SAAInstance inst;
  inst.problem = &problem;
  inst.N = N;
  if (problem.domain) {
    SeedSpec th = seed;
    th.role = StreamRole::threshold;
    inst.thresholds = sample_thresholds(*problem.domain, N, th);
  }
  if (problem.objective.sampled() && !problem.recourse) {
    SeedSpec ob = seed;
    ob.role = StreamRole::objective;
    RngStream s = make_stream(ob);
    inst.objective_draws.resize(static_cast<std::size_t>(N));
    for (std::int64_t i = 0; i < N; ++i)
      inst.objective_draws[static_cast<std::size_t>(i)] = problem.objective.law->sample(s);
  }
  if (problem.recourse) {
    SeedSpec th = seed;
    th.role = StreamRole::threshold;
    RngStream s = make_stream(th);
    const auto& laws = problem.recourse->h_laws;
    inst.h_draws.resize(static_cast<std::size_t>(N));
    for (std::int64_t i = 0; i < N; ++i) {
      Vector h(laws.size());
      for (std::size_t c = 0; c < laws.size(); ++c) h[c] = laws[c].sample(s);
      inst.h_draws[static_cast<std::size_t>(i)] = std::move(h);
    }
    inst.recourse_cone = enumerate_rays(problem.recourse->W);
  }
  return inst;
}

std::optional<Vector> find_feasible_point(const BoxSet& box,
                                          const std::optional<AffineIneq>& ineq,
                                          const std::vector<const ConstraintFn*>& fns,
                                          std::span<const double> rhs, double tol) {
  require(fns.size() == rhs.size(), "find_feasible_point: fns/rhs size mismatch");
  const int n = box.dim();

  std::vector<Vector> rows;
  Vector row_rhs;
  std::vector<const ConstraintFn*> cut_fns;
  Vector cut_rhs_vals;
  if (ineq) {
    for (int i = 0; i < ineq->G.rows; ++i) {
      Vector r(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] = ineq->G(i, j);
      rows.push_back(std::move(r));
      row_rhs.push_back(ineq->g[static_cast<std::size_t>(i)]);
    }
  }
  for (std::size_t k = 0; k < fns.size(); ++k) {
    if (fns[k]->is_affine()) {
      rows.push_back(fns[k]->linear_part());
      row_rhs.push_back(rhs[k] - fns[k]->constant_part());
    } else {
      cut_fns.push_back(fns[k]);
      cut_rhs_vals.push_back(rhs[k]);
    }
  }

  std::vector<Vector> cuts;  // over (x, s)
  Vector cuts_rhs;
  for (int iter = 0; iter < 300; ++iter) {
    LPProblem lp;
    const int rows_n = static_cast<int>(rows.size() + cuts.size());
    lp.c.assign(static_cast<std::size_t>(n) + 1, 0.0);
    lp.c.back() = 1.0;  // minimize the violation bound s
    lp.A = Matrix(rows_n, n + 1);
    lp.b.resize(static_cast<std::size_t>(rows_n));
    lp.sense.assign(static_cast<std::size_t>(rows_n), RowSense::le);
    int r = 0;
    for (std::size_t i = 0; i < rows.size(); ++i, ++r) {
      for (int j = 0; j < n; ++j) lp.A(r, j) = rows[i][static_cast<std::size_t>(j)];
      lp.b[static_cast<std::size_t>(r)] = row_rhs[i];
    }
    for (std::size_t i = 0; i < cuts.size(); ++i, ++r) {
      for (int j = 0; j <= n; ++j) lp.A(r, j) = cuts[i][static_cast<std::size_t>(j)];
      lp.b[static_cast<std::size_t>(r)] = cuts_rhs[i];
    }
    lp.lower = box.lo;
    lp.upper = box.hi;
    lp.lower.push_back(-1.0);
    lp.upper.push_back(kInf);

    LPResult res = lp_solve(lp);
    if (res.status != LPStatus::optimal) return std::nullopt;
    Vector x(res.x.begin(), res.x.begin() + n);
    double worst = 0.0;
    for (std::size_t k = 0; k < cut_fns.size(); ++k)
      worst = std::max(worst, cut_fns[k]->eval(x) - cut_rhs_vals[k]);
    if (worst <= tol) return x;
    if (res.value > tol) return std::nullopt;  // relaxation already violates
    for (std::size_t k = 0; k < cut_fns.size(); ++k) {
      Vector g = cut_fns[k]->subgradient(x);
      double val = cut_fns[k]->eval(x);
      Vector cut(static_cast<std::size_t>(n) + 1, 0.0);
      for (int j = 0; j < n; ++j) cut[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j)];
      cut.back() = -1.0;  // c(x_t) + g'(x - x_t) - rhs <= s
      cuts.push_back(std::move(cut));
      cuts_rhs.push_back(cut_rhs_vals[k] - val + dot(g, x));
    }
  }
  throw SolverError("find_feasible_point: cutting-plane loop did not converge");
}

SAASolution solve_convex(const SAAInstance& instance, double tol) {
  require(instance.problem != nullptr, "solve_convex: empty instance");
  require(tol > 0.0, "solve_convex: tol must be positive");
  const StochasticProblem& p = *instance.problem;
  const int n = p.dim;

  RowSet fixed = affine_saa_rows(instance);
  NonlinearSet nl = nonlinear_saa_constraints(instance);

  SAASolution sol;

  // Anchor point: certifies the SAA domain is nonempty and seeds the first
  // objective cut, which keeps the epigraph variable bounded below.
  Vector anchor;
  {
    std::vector<const ConstraintFn*> fns = nl.fns;
    AffineIneq all_rows;
    all_rows.G = Matrix(static_cast<int>(fixed.rows.size()), n);
    for (std::size_t i = 0; i < fixed.rows.size(); ++i)
      for (int j = 0; j < n; ++j) all_rows.G(static_cast<int>(i), j) = fixed.rows[i][static_cast<std::size_t>(j)];
    all_rows.g = fixed.rhs;
    auto x0 = find_feasible_point(p.box, all_rows.G.rows > 0 ? std::optional<AffineIneq>(all_rows)
                                                             : std::nullopt,
                                  fns, nl.rhs);
    if (!x0) {
      sol.saa_infeasible = true;
      return sol;
    }
    anchor = *x0;
  }

  std::vector<Vector> cuts;  // rows over (x, theta)
  Vector cuts_rhs;
  double best = instance.objective_value(anchor);
  Vector best_x = anchor;
  {
    Vector g = instance.objective_subgradient(anchor);
    Vector cut(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 0; j < n; ++j) cut[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j)];
    cut.back() = -1.0;
    cuts.push_back(std::move(cut));
    cuts_rhs.push_back(dot(g, anchor) - best);
  }
  double theta_last = -kInf;
  bool done = false;

  const int cap = 400;
  int iter = 0;
  for (; iter < cap && !done; ++iter) {
    LPProblem lp;
    const int rows_n = static_cast<int>(fixed.rows.size() + cuts.size());
    lp.c.assign(static_cast<std::size_t>(n) + 1, 0.0);
    lp.c.back() = 1.0;  // minimize theta
    lp.A = Matrix(rows_n, n + 1);
    lp.b.resize(static_cast<std::size_t>(rows_n));
    lp.sense.assign(static_cast<std::size_t>(rows_n), RowSense::le);
    int r = 0;
    for (std::size_t i = 0; i < fixed.rows.size(); ++i, ++r) {
      for (int j = 0; j < n; ++j) lp.A(r, j) = fixed.rows[i][static_cast<std::size_t>(j)];
      lp.b[static_cast<std::size_t>(r)] = fixed.rhs[i];
    }
    for (std::size_t i = 0; i < cuts.size(); ++i, ++r) {
      for (int j = 0; j <= n; ++j) lp.A(r, j) = cuts[i][static_cast<std::size_t>(j)];
      lp.b[static_cast<std::size_t>(r)] = cuts_rhs[i];
    }
    lp.lower = p.box.lo;
    lp.upper = p.box.hi;
    lp.lower.push_back(-kInf);
    lp.upper.push_back(kInf);

    LPResult res = lp_solve(lp);
    if (res.status == LPStatus::infeasible) {
      sol.saa_infeasible = true;
      sol.iterations = iter;
      return sol;
    }
    if (res.status != LPStatus::optimal) throw SolverError("solve_convex: master LP failed");
    theta_last = res.value;
    Vector x(res.x.begin(), res.x.begin() + n);

    // Feasibility cuts first; objective cuts once the iterate is feasible.
    double worst = 0.0;
    for (std::size_t k = 0; k < nl.fns.size(); ++k)
      worst = std::max(worst, nl.fns[k]->eval(x) - nl.rhs[k]);
    if (worst > 1e-9) {
      for (std::size_t k = 0; k < nl.fns.size(); ++k) {
        double val = nl.fns[k]->eval(x);
        if (val - nl.rhs[k] <= 0.0) continue;
        Vector g = nl.fns[k]->subgradient(x);
        Vector cut(static_cast<std::size_t>(n) + 1, 0.0);
        for (int j = 0; j < n; ++j) cut[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j)];
        cuts.push_back(std::move(cut));
        cuts_rhs.push_back(nl.rhs[k] - val + dot(g, x));
      }
      continue;
    }

    double v = instance.objective_value(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
    if (best - theta_last <= tol) {
      done = true;
      break;
    }
    Vector g = instance.objective_subgradient(x);
    Vector cut(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 0; j < n; ++j) cut[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j)];
    cut.back() = -1.0;  // v + g'(x - x_t) <= theta
    cuts.push_back(std::move(cut));
    cuts_rhs.push_back(dot(g, x) - v);
  }

  if (best_x.empty()) throw SolverError("solve_convex: no feasible iterate found");
  sol.x = best_x;
  sol.value = best;
  sol.gap = best - theta_last;
  sol.gap_exceeded = sol.gap > tol;
  sol.iterations = iter;
  sol.feasibility_residual = max_violation(instance, fixed, nl, sol.x);
  return sol;
}

SAASolution solve_two_stage(const SAAInstance& instance) {
  require(instance.problem != nullptr && instance.problem->recourse.has_value(),
          "solve_two_stage: instance is not two-stage");
  const StochasticProblem& p = *instance.problem;
  const TwoStageLP& ts = *p.recourse;
  const int n = p.dim;
  const int d = ts.W.rows;
  const int py = ts.W.cols;
  const std::int64_t N = instance.N;

  // Canonical scenario order: lexicographic in h. The average objective is
  // permutation invariant, and a fixed order pins the simplex pivot path.
  std::vector<std::size_t> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return instance.h_draws[a] < instance.h_draws[b];
  });

  const int ineq_rows = p.x_ineq ? p.x_ineq->G.rows : 0;
  const int rows_n = ineq_rows + static_cast<int>(N) * d;
  const int vars_n = n + static_cast<int>(N) * py;

  LPProblem lp;
  lp.c.assign(static_cast<std::size_t>(vars_n), 0.0);
  for (int j = 0; j < n; ++j) lp.c[static_cast<std::size_t>(j)] = ts.c[static_cast<std::size_t>(j)];
  for (std::int64_t i = 0; i < N; ++i)
    for (int j = 0; j < py; ++j)
      lp.c[static_cast<std::size_t>(n + i * py + j)] = ts.g[static_cast<std::size_t>(j)] / static_cast<double>(N);
  lp.A = Matrix(rows_n, vars_n);
  lp.b.assign(static_cast<std::size_t>(rows_n), 0.0);
  lp.sense.assign(static_cast<std::size_t>(rows_n), RowSense::eq);
  int r = 0;
  for (int i = 0; i < ineq_rows; ++i, ++r) {
    for (int j = 0; j < n; ++j) lp.A(r, j) = p.x_ineq->G(i, j);
    lp.b[static_cast<std::size_t>(r)] = p.x_ineq->g[static_cast<std::size_t>(i)];
    lp.sense[static_cast<std::size_t>(r)] = RowSense::le;
  }
  for (std::int64_t i = 0; i < N; ++i) {
    const Vector& h = instance.h_draws[order[static_cast<std::size_t>(i)]];
    for (int row = 0; row < d; ++row, ++r) {
      for (int j = 0; j < n; ++j) lp.A(r, j) = ts.T(row, j);
      for (int j = 0; j < py; ++j) lp.A(r, static_cast<int>(n + i * py + j)) = ts.W(row, j);
      lp.b[static_cast<std::size_t>(r)] = h[static_cast<std::size_t>(row)];
    }
  }
  lp.lower.assign(static_cast<std::size_t>(vars_n), 0.0);
  lp.upper.assign(static_cast<std::size_t>(vars_n), kInf);
  for (int j = 0; j < n; ++j) {
    lp.lower[static_cast<std::size_t>(j)] = p.box.lo[static_cast<std::size_t>(j)];
    lp.upper[static_cast<std::size_t>(j)] = p.box.hi[static_cast<std::size_t>(j)];
  }

  SAASolution sol;
  LPResult res = lp_solve(lp);
  if (res.status == LPStatus::infeasible) {
    sol.saa_infeasible = true;
    return sol;
  }
  if (res.status == LPStatus::unbounded)
    throw SolverError("solve_two_stage: extensive form unbounded (model error)");

  // Lexicographic refinement of the first-stage point among optima.
  double vstar = res.value;
  double slack = 1e-9 * std::max(1.0, std::abs(vstar));
  LPProblem ref = lp;
  ref.A = Matrix(rows_n + 1 + n, vars_n);
  ref.b.assign(static_cast<std::size_t>(rows_n + 1 + n), 0.0);
  ref.sense.assign(static_cast<std::size_t>(rows_n + 1 + n), RowSense::eq);
  for (int i = 0; i < rows_n; ++i) {
    for (int j = 0; j < vars_n; ++j) ref.A(i, j) = lp.A(i, j);
    ref.b[static_cast<std::size_t>(i)] = lp.b[static_cast<std::size_t>(i)];
    ref.sense[static_cast<std::size_t>(i)] = lp.sense[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < vars_n; ++j) ref.A(rows_n, j) = lp.c[static_cast<std::size_t>(j)];
  ref.b[static_cast<std::size_t>(rows_n)] = vstar + slack;
  ref.sense[static_cast<std::size_t>(rows_n)] = RowSense::le;

  Vector final_x(res.x.begin(), res.x.begin() + n);
  Vector final_z = res.x;
  bool refined = true;
  for (int j = 0; j < n && refined; ++j) {
    LPProblem step = ref;
    step.c.assign(static_cast<std::size_t>(vars_n), 0.0);
    step.c[static_cast<std::size_t>(j)] = 1.0;
    // Pin previously refined coordinates.
    int extra = rows_n + 1;
    for (int l = 0; l < j; ++l, ++extra) {
      step.A(extra, l) = 1.0;
      step.b[static_cast<std::size_t>(extra)] = final_x[static_cast<std::size_t>(l)];
      step.sense[static_cast<std::size_t>(extra)] = RowSense::eq;
    }
    // Unused pin rows stay 0 = 0.
    LPResult rr = lp_solve(step);
    if (rr.status != LPStatus::optimal) {
      refined = false;
      break;
    }
    final_x[static_cast<std::size_t>(j)] = rr.x[static_cast<std::size_t>(j)];
    final_z = rr.x;
  }

  sol.x = final_x;
  sol.value = dot(lp.c, final_z);
  sol.gap = 0.0;
  sol.iterations = res.iterations;

  // Residual against the SAA domain induced by the sampled scenarios.
  RowSet rows = affine_saa_rows(instance);
  NonlinearSet nl;
  sol.feasibility_residual = max_violation(instance, rows, nl, sol.x);
  return sol;
}

DeviationEstimate estimate_uniform_deviation(const SAAInstance& instance,
                                             const std::vector<Vector>& grid,
                                             std::int64_t M_ref, const SeedSpec& ref_seed) {
  require(!grid.empty(), "estimate_uniform_deviation: empty grid");
  const StochasticProblem& p = *instance.problem;
  DeviationEstimate out;

  // Reference draws are materialized once when no closed form exists.
  std::vector<double> ref_draws;
  bool need_mc = false;
  if (!p.recourse) {
    for (const Vector& x : grid) {
      if (!p.objective.expectation(x).has_value()) {
        need_mc = true;
        break;
      }
    }
  } else {
    need_mc = true;
  }
  std::vector<Vector> ref_h;
  if (need_mc) {
    require(M_ref >= 2, "estimate_uniform_deviation: M_ref >= 2 required");
    SeedSpec rs = ref_seed;
    rs.role = StreamRole::oracle;
    RngStream s = make_stream(rs);
    if (p.recourse) {
      ref_h.resize(static_cast<std::size_t>(M_ref));
      for (std::int64_t i = 0; i < M_ref; ++i) {
        Vector h(p.recourse->h_laws.size());
        for (std::size_t c = 0; c < h.size(); ++c) h[c] = p.recourse->h_laws[c].sample(s);
        ref_h[static_cast<std::size_t>(i)] = std::move(h);
      }
    } else {
      ref_draws.resize(static_cast<std::size_t>(M_ref));
      for (std::int64_t i = 0; i < M_ref; ++i)
        ref_draws[static_cast<std::size_t>(i)] = p.objective.law->sample(s);
    }
  }

  for (const Vector& x : grid) {
    double fhat = instance.objective_value(x);
    double fref;
    double se = 0.0;
    if (!need_mc) {
      fref = *p.objective.expectation(x);
    } else if (p.recourse) {
      std::vector<double> vals;
      vals.reserve(ref_h.size());
      for (const Vector& h : ref_h)
        vals.push_back(dot(p.recourse->c, x) +
                       second_stage_value(p.recourse->W, p.recourse->T, h, p.recourse->g, x));
      fref = mean(vals);
      se = std::sqrt(sample_variance(vals) / static_cast<double>(vals.size()));
    } else {
      std::vector<double> vals;
      vals.reserve(ref_draws.size());
      for (double d : ref_draws) vals.push_back(p.objective.term_value(x, d));
      fref = mean(vals);
      se = std::sqrt(sample_variance(vals) / static_cast<double>(vals.size()));
    }
    out.max_deviation = std::max(out.max_deviation, std::abs(fhat - fref));
    out.reference_stderr = std::max(out.reference_stderr, se);
  }
  return out;
}

}  // namespace feaslab
