#include "feaslab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "feaslab/errors.hpp"

namespace feaslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarStatus { at_lower, at_upper, basic };

// Bounded-variable two-phase simplex on  min c'z : A z = b, l <= z <= u,
// with a dense explicit basis inverse. Bland's rule on entering and leaving
// indices guarantees termination; an iteration cap backs it up.
class Simplex {
 public:
  Simplex(int rows) : m_(rows) {}

  int add_column(Vector col, double lo, double hi, double cost) {
    cols_.push_back(std::move(col));
    lower_.push_back(lo);
    upper_.push_back(hi);
    cost_.push_back(cost);
    status_.push_back(VarStatus::at_lower);
    return static_cast<int>(cols_.size()) - 1;
  }

  void set_rhs(Vector b) { b_ = std::move(b); }

  // Returns false when phase 1 ends with positive infeasibility.
  bool run_phase1() {
    const double bscale = b_scale();
    int n_real = static_cast<int>(cols_.size());
    // Nonbasic start: every real column rests at a finite bound.
    for (int j = 0; j < n_real; ++j) {
      status_[j] = std::isfinite(lower_[j]) ? VarStatus::at_lower : VarStatus::at_upper;
    }
    Vector residual = b_;
    for (int j = 0; j < n_real; ++j) {
      double v = nonbasic_value(j);
      if (v != 0.0)
        for (int i = 0; i < m_; ++i) residual[i] -= cols_[j][i] * v;
    }
    // One artificial per row, signed so its initial value is nonnegative.
    first_artificial_ = n_real;
    basis_.assign(m_, -1);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    xb_.assign(m_, 0.0);
    Vector phase1_cost(cols_.size(), 0.0);
    for (int i = 0; i < m_; ++i) {
      double sgn = residual[i] >= 0.0 ? 1.0 : -1.0;
      Vector col(m_, 0.0);
      col[i] = sgn;
      int j = add_column(std::move(col), 0.0, kInf, 0.0);
      phase1_cost.push_back(1.0);
      basis_[i] = j;
      status_[j] = VarStatus::basic;
      binv(i, i) = sgn;
      xb_[i] = std::abs(residual[i]);
    }
    iterate(phase1_cost, /*detect_unbounded=*/false);
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= first_artificial_) infeas += std::max(0.0, xb_[i]);
    if (infeas > 1e-8 * bscale) return false;
    drive_out_artificials();
    for (int j = first_artificial_; j < static_cast<int>(cols_.size()); ++j) {
      lower_[j] = 0.0;
      upper_[j] = 0.0;  // fixed; never re-enters
    }
    return true;
  }

  // Returns false when the phase-2 problem is unbounded below.
  bool run_phase2() {
    Vector cost = cost_;
    return iterate(cost, /*detect_unbounded=*/true);
  }

  double value(int j) const {
    if (status_[j] == VarStatus::basic) {
      for (int i = 0; i < m_; ++i)
        if (basis_[i] == j) return xb_[i];
    }
    return nonbasic_value(j);
  }

  Vector row_duals() const {
    Vector y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double cb = cost_[basis_[i]];
      if (cb != 0.0)
        for (int jj = 0; jj < m_; ++jj) y[jj] += cb * binv(i, jj);
    }
    return y;
  }

  int iterations() const { return total_iters_; }

 private:
  double& binv(int i, int j) { return binv_[static_cast<std::size_t>(i) * m_ + j]; }
  double binv(int i, int j) const { return binv_[static_cast<std::size_t>(i) * m_ + j]; }

  double nonbasic_value(int j) const {
    if (status_[j] == VarStatus::at_lower)
      return std::isfinite(lower_[j]) ? lower_[j] : 0.0;
    return std::isfinite(upper_[j]) ? upper_[j] : 0.0;
  }

  double b_scale() const {
    double s = 1.0;
    for (double v : b_) s = std::max(s, std::abs(v));
    return s;
  }

  bool iterate(const Vector& cost, bool detect_unbounded) {
    const int ncols = static_cast<int>(cols_.size());
    double cscale = 1.0;
    for (double c : cost) cscale = std::max(cscale, std::abs(c));
    const double dual_tol = 1e-9 * cscale;
    const int cap = 50000 + 200 * (m_ + ncols);

    int since_refactor = 0;
    for (int iter = 0; iter < cap; ++iter, ++total_iters_) {
      // y = B^-T c_B, then Bland's entering choice on reduced costs.
      Vector y(m_, 0.0);
      for (int i = 0; i < m_; ++i) {
        double cb = cost[basis_[i]];
        if (cb != 0.0)
          for (int jj = 0; jj < m_; ++jj) y[jj] += cb * binv(i, jj);
      }
      int enter = -1;
      for (int j = 0; j < ncols; ++j) {
        if (status_[j] == VarStatus::basic) continue;
        if (lower_[j] == upper_[j]) continue;  // fixed
        double d = cost[j] - dot(y, cols_[j]);
        if (status_[j] == VarStatus::at_lower ? d < -dual_tol : d > dual_tol) {
          enter = j;
          break;  // smallest index first
        }
      }
      if (enter < 0) return true;  // optimal for this cost

      double delta = status_[enter] == VarStatus::at_lower ? 1.0 : -1.0;
      Vector w(m_, 0.0);
      for (int i = 0; i < m_; ++i) {
        double s = 0.0;
        for (int jj = 0; jj < m_; ++jj) s += binv(i, jj) * cols_[enter][jj];
        w[i] = s;
      }

      double t_bound = kInf;
      if (std::isfinite(lower_[enter]) && std::isfinite(upper_[enter]))
        t_bound = upper_[enter] - lower_[enter];

      double t_star = t_bound;
      int leave_row = -1;
      double leave_rate = 0.0;
      for (int i = 0; i < m_; ++i) {
        double rate = -delta * w[i];
        double t;
        if (rate < -1e-11) {
          double lb = lower_[basis_[i]];
          if (!std::isfinite(lb)) continue;
          t = (xb_[i] - lb) / (-rate);
        } else if (rate > 1e-11) {
          double ub = upper_[basis_[i]];
          if (!std::isfinite(ub)) continue;
          t = (ub - xb_[i]) / rate;
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        if (t < t_star - 1e-12 ||
            (t <= t_star + 1e-12 && leave_row >= 0 && basis_[i] < basis_[leave_row])) {
          t_star = t;
          leave_row = i;
          leave_rate = rate;
        } else if (t <= t_star + 1e-12 && leave_row < 0 && t <= t_bound) {
          t_star = std::min(t, t_star);
          leave_row = i;
          leave_rate = rate;
        }
      }

      if (!std::isfinite(t_star)) {
        if (detect_unbounded) return false;
        throw SolverError("simplex: unbounded phase-1 subproblem");
      }

      if (leave_row < 0 || t_bound <= t_star) {
        // Bound flip, basis unchanged.
        for (int i = 0; i < m_; ++i) xb_[i] -= delta * t_bound * w[i];
        status_[enter] =
            status_[enter] == VarStatus::at_lower ? VarStatus::at_upper : VarStatus::at_lower;
        continue;
      }

      // Pivot: entering variable becomes basic in leave_row.
      double enter_val = nonbasic_value(enter) + delta * t_star;
      for (int i = 0; i < m_; ++i)
        if (i != leave_row) xb_[i] -= delta * t_star * w[i];
      int leaving = basis_[leave_row];
      status_[leaving] = leave_rate < 0.0 ? VarStatus::at_lower : VarStatus::at_upper;
      basis_[leave_row] = enter;
      status_[enter] = VarStatus::basic;
      xb_[leave_row] = enter_val;

      double piv = w[leave_row];
      for (int jj = 0; jj < m_; ++jj) binv(leave_row, jj) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row || w[i] == 0.0) continue;
        double f = w[i];
        for (int jj = 0; jj < m_; ++jj) binv(i, jj) -= f * binv(leave_row, jj);
      }

      if (++since_refactor >= 64) {
        refactor();
        since_refactor = 0;
      }
    }
    throw SolverError("simplex: cycling guard triggered (iteration cap reached)");
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < first_artificial_) continue;
      int pivot_col = -1;
      Vector wrow;
      for (int j = 0; j < first_artificial_; ++j) {
        if (status_[j] == VarStatus::basic) continue;
        double s = 0.0;
        for (int jj = 0; jj < m_; ++jj) s += binv(r, jj) * cols_[j][jj];
        if (std::abs(s) > 1e-7) {
          pivot_col = j;
          break;
        }
      }
      if (pivot_col < 0) continue;  // dependent row; artificial stays basic at 0
      // Degenerate pivot: basic values are unchanged (artificial sits at 0).
      Vector w(m_, 0.0);
      for (int i = 0; i < m_; ++i) {
        double s = 0.0;
        for (int jj = 0; jj < m_; ++jj) s += binv(i, jj) * cols_[pivot_col][jj];
        w[i] = s;
      }
      int old = basis_[r];
      status_[old] = VarStatus::at_lower;
      basis_[r] = pivot_col;
      double entering_value = nonbasic_value(pivot_col);
      status_[pivot_col] = VarStatus::basic;
      double piv = w[r];
      for (int jj = 0; jj < m_; ++jj) binv(r, jj) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == r || w[i] == 0.0) continue;
        double f = w[i];
        for (int jj = 0; jj < m_; ++jj) binv(i, jj) -= f * binv(r, jj);
      }
      xb_[r] = entering_value;
      refactor();
    }
  }

  // Rebuild B^-1 by Gauss-Jordan and recompute basic values from scratch.
  void refactor() {
    std::vector<double> mat(static_cast<std::size_t>(m_) * 2 * m_, 0.0);
    auto at = [&](int i, int j) -> double& { return mat[static_cast<std::size_t>(i) * 2 * m_ + j]; };
    for (int i = 0; i < m_; ++i) {
      for (int r = 0; r < m_; ++r) at(r, i) = cols_[basis_[i]][r];
      at(i, m_ + i) = 1.0;
    }
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      for (int r = col + 1; r < m_; ++r)
        if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
      if (std::abs(at(piv, col)) < 1e-12) throw SolverError("simplex: singular basis");
      if (piv != col)
        for (int j = 0; j < 2 * m_; ++j) std::swap(at(piv, j), at(col, j));
      double p = at(col, col);
      for (int j = 0; j < 2 * m_; ++j) at(col, j) /= p;
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = at(r, col);
        if (f == 0.0) continue;
        for (int j = 0; j < 2 * m_; ++j) at(r, j) -= f * at(col, j);
      }
    }
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) binv(i, j) = at(i, m_ + j);

    Vector rhs = b_;
    for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
      if (status_[j] == VarStatus::basic) continue;
      double v = nonbasic_value(j);
      if (v != 0.0)
        for (int i = 0; i < m_; ++i) rhs[i] -= cols_[j][i] * v;
    }
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int jj = 0; jj < m_; ++jj) s += binv(i, jj) * rhs[jj];
      xb_[i] = s;
    }
  }

  int m_;
  std::vector<Vector> cols_;
  Vector lower_, upper_, cost_;
  std::vector<VarStatus> status_;
  Vector b_;
  std::vector<int> basis_;
  Vector binv_;
  Vector xb_;
  int first_artificial_ = 0;
  int total_iters_ = 0;
};

struct Mapped {
  Simplex simplex;
  // original var j -> (positive part column, optional negative part column)
  std::vector<std::pair<int, int>> var_cols;
};

Mapped build(const LPProblem& p) {
  const int n = p.num_vars();
  const int m = p.num_rows();
  if (p.A.rows != m || p.A.cols != n || static_cast<int>(p.b.size()) != m ||
      static_cast<int>(p.sense.size()) != m)
    throw std::invalid_argument("lp_solve: inconsistent problem dimensions");
  if (!p.A.finite()) throw std::invalid_argument("lp_solve: non-finite matrix entry");
  for (double v : p.b)
    if (!std::isfinite(v)) throw std::invalid_argument("lp_solve: non-finite rhs");
  for (double v : p.c)
    if (!std::isfinite(v)) throw std::invalid_argument("lp_solve: non-finite cost");
  if (p.A.nonzeros() > 10000) throw std::invalid_argument("lp_solve: problem too large");

  Vector lower = p.lower, upper = p.upper;
  if (lower.empty()) lower.assign(n, -kInf);
  if (upper.empty()) upper.assign(n, kInf);
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
    throw std::invalid_argument("lp_solve: bound vector size mismatch");
  for (int j = 0; j < n; ++j)
    if (lower[j] > upper[j]) throw std::invalid_argument("lp_solve: crossing bounds");

  Mapped out{Simplex(m), {}};
  out.var_cols.reserve(n);
  for (int j = 0; j < n; ++j) {
    Vector col(m, 0.0);
    for (int i = 0; i < m; ++i) col[i] = p.A(i, j);
    if (!std::isfinite(lower[j]) && !std::isfinite(upper[j])) {
      Vector neg = col;
      for (double& v : neg) v = -v;
      int cp = out.simplex.add_column(std::move(col), 0.0, kInf, p.c[j]);
      int cn = out.simplex.add_column(std::move(neg), 0.0, kInf, -p.c[j]);
      out.var_cols.emplace_back(cp, cn);
    } else {
      int cj = out.simplex.add_column(std::move(col), lower[j], upper[j], p.c[j]);
      out.var_cols.emplace_back(cj, -1);
    }
  }
  for (int i = 0; i < m; ++i) {
    if (p.sense[i] == RowSense::eq) continue;
    Vector col(m, 0.0);
    col[i] = p.sense[i] == RowSense::le ? 1.0 : -1.0;
    out.simplex.add_column(std::move(col), 0.0, kInf, 0.0);
  }
  out.simplex.set_rhs(p.b);
  return out;
}

}  // namespace

LPResult lp_solve(const LPProblem& problem) {
  Mapped mp = build(problem);
  LPResult res;
  if (!mp.simplex.run_phase1()) {
    res.status = LPStatus::infeasible;
    res.iterations = mp.simplex.iterations();
    return res;
  }
  if (!mp.simplex.run_phase2()) {
    res.status = LPStatus::unbounded;
    res.iterations = mp.simplex.iterations();
    return res;
  }
  res.status = LPStatus::optimal;
  res.iterations = mp.simplex.iterations();
  const int n = problem.num_vars();
  res.x.resize(n);
  for (int j = 0; j < n; ++j) {
    auto [cp, cn] = mp.var_cols[j];
    res.x[j] = mp.simplex.value(cp) - (cn >= 0 ? mp.simplex.value(cn) : 0.0);
  }
  res.value = dot(problem.c, res.x);
  res.dual = mp.simplex.row_duals();
  return res;
}

bool lp_feasible(const LPProblem& problem) {
  Mapped mp = build(problem);
  return mp.simplex.run_phase1();
}

}  // namespace feaslab
