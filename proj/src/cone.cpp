#include "feaslab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "feaslab/errors.hpp"
#include "feaslab/lp.hpp"

namespace feaslab {

namespace {

constexpr double kRankTol = 1e-9;
constexpr double kZeroTol = 1e-12;
constexpr double kFarkasTol = 1e-8;

void normalize(Vector& v) {
  double n = norm2(v);
  if (n > 0.0)
    for (double& e : v) e /= n;
}

// A product magnitude in the open band (kZeroTol, kRankTol) cannot be
// classified as zero or nonzero reliably; the input is rejected instead of
// silently perturbed.
double classify(double s) {
  double m = std::abs(s);
  if (m <= kZeroTol) return 0.0;
  if (m < kRankTol)
    throw std::invalid_argument("enumerate_rays: numerically degenerate input (rank tolerance)");
  return s;
}

struct Ray {
  Vector v;
  std::uint32_t active = 0;  // bitmask over processed constraints
};

}  // namespace

ConeGenerators enumerate_rays(const Matrix& W) {
  const int d = W.rows;
  const int p = W.cols;
  if (d < 1 || p < 1) throw std::invalid_argument("enumerate_rays: empty matrix");
  if (d > 12 || p > 24) throw std::invalid_argument("enumerate_rays: size limits d<=12, p<=24");
  if (!W.finite()) throw std::invalid_argument("enumerate_rays: non-finite entry");

  std::vector<Vector> constraints;  // unit normals, one per column of W
  constraints.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    Vector w(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) w[static_cast<std::size_t>(i)] = W(i, j);
    double n = norm2(w);
    if (n < kRankTol)
      throw std::invalid_argument("enumerate_rays: degenerate (near-zero) inequality column");
    for (double& e : w) e /= n;
    constraints.push_back(std::move(w));
  }

  std::vector<Vector> lin;  // orthonormal lineality basis
  for (int i = 0; i < d; ++i) {
    Vector e(static_cast<std::size_t>(d), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    lin.push_back(std::move(e));
  }
  std::vector<Ray> rays;

  for (int j = 0; j < p; ++j) {
    const Vector& w = constraints[static_cast<std::size_t>(j)];
    const std::uint32_t bit = 1u << j;

    // Pivot the lineality space first: one basis direction with w-component
    // turns into a ray, the rest is rotated into the hyperplane w-perp.
    int pivot = -1;
    double pivot_val = 0.0;
    for (std::size_t i = 0; i < lin.size(); ++i) {
      double s = dot(w, lin[i]);
      if (std::abs(s) > std::abs(pivot_val)) {
        pivot_val = s;
        pivot = static_cast<int>(i);
      }
    }
    if (pivot >= 0 && classify(pivot_val) != 0.0) {
      Vector v = lin[static_cast<std::size_t>(pivot)];
      lin.erase(lin.begin() + pivot);
      for (Vector& b : lin) {
        axpy(-dot(w, b) / pivot_val, v, b);
      }
      // Re-orthonormalize the remaining basis.
      for (std::size_t i = 0; i < lin.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) axpy(-dot(lin[i], lin[k]), lin[k], lin[i]);
        normalize(lin[i]);
      }
      for (Ray& r : rays) {
        axpy(-dot(w, r.v) / pivot_val, v, r.v);
        normalize(r.v);
        r.active |= bit;  // the adjusted ray lies in the hyperplane of w
      }
      Ray nr;
      nr.v = v;
      if (pivot_val < 0.0)
        for (double& e : nr.v) e = -e;
      normalize(nr.v);
      // All previously processed constraints vanish on the old lineality.
      nr.active = bit - 1;
      rays.push_back(std::move(nr));
      continue;
    }

    // Lineality is orthogonal to w; split rays by sign.
    std::vector<std::size_t> pos, neg;
    std::vector<double> s(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) {
      s[i] = classify(dot(w, rays[i].v));
      if (s[i] > 0.0)
        pos.push_back(i);
      else if (s[i] < 0.0)
        neg.push_back(i);
      else
        rays[i].active |= bit;
    }
    if (neg.empty()) continue;

    std::vector<Ray> next;
    for (std::size_t i = 0; i < rays.size(); ++i)
      if (s[i] >= 0.0) next.push_back(rays[i]);

    for (std::size_t ip : pos) {
      for (std::size_t in : neg) {
        // Combinatorial adjacency: no third ray is tight on the common set.
        std::uint32_t common = rays[ip].active & rays[in].active;
        bool adjacent = true;
        for (std::size_t k = 0; k < rays.size(); ++k) {
          if (k == ip || k == in) continue;
          if ((rays[k].active & common) == common) {
            adjacent = false;
            break;
          }
        }
        if (!adjacent) continue;
        Ray nr;
        nr.v.assign(static_cast<std::size_t>(d), 0.0);
        axpy(s[ip], rays[in].v, nr.v);
        axpy(-s[in], rays[ip].v, nr.v);
        normalize(nr.v);
        // Tight set recomputed numerically over the processed prefix.
        nr.active = bit;
        for (int q = 0; q < j; ++q) {
          if (std::abs(dot(constraints[static_cast<std::size_t>(q)], nr.v)) <= kRankTol)
            nr.active |= 1u << q;
        }
        next.push_back(std::move(nr));
      }
    }
    rays = std::move(next);
  }

  ConeGenerators gen;
  gen.dim = d;
  for (Ray& r : rays) gen.rays.push_back(std::move(r.v));
  gen.lineality = std::move(lin);
  // Deterministic output order.
  std::sort(gen.rays.begin(), gen.rays.end());
  std::sort(gen.lineality.begin(), gen.lineality.end());
  return gen;
}

bool farkas_feasible_rhs(const ConeGenerators& gen, const Vector& v) {
  if (static_cast<int>(v.size()) != gen.dim)
    throw std::invalid_argument("farkas_feasible: dimension mismatch");
  for (const Vector& r : gen.rays)
    if (dot(r, v) < -kFarkasTol) return false;
  for (const Vector& l : gen.lineality)
    if (std::abs(dot(l, v)) > kFarkasTol) return false;
  return true;
}

bool farkas_feasible(const ConeGenerators& gen, const Vector& h, const Matrix& T,
                     const Vector& x) {
  Vector v = T.multiply(x);
  if (v.size() != h.size()) throw std::invalid_argument("farkas_feasible: dimension mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = h[i] - v[i];
  return farkas_feasible_rhs(gen, v);
}

SecondStageEval second_stage_eval(const Matrix& W, const Matrix& T, const Vector& h,
                                  const Vector& g, const Vector& x) {
  if (static_cast<int>(g.size()) != W.cols)
    throw std::invalid_argument("second_stage: cost dimension mismatch");
  Vector rhs = T.multiply(x);
  if (rhs.size() != h.size()) throw std::invalid_argument("second_stage: dimension mismatch");
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = h[i] - rhs[i];

  LPProblem lp;
  lp.c = g;
  lp.A = W;
  lp.b = rhs;
  lp.sense.assign(static_cast<std::size_t>(W.rows), RowSense::eq);
  lp.lower.assign(g.size(), 0.0);
  lp.upper.assign(g.size(), std::numeric_limits<double>::infinity());
  LPResult res = lp_solve(lp);

  SecondStageEval out;
  if (res.status == LPStatus::infeasible) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  if (res.status == LPStatus::unbounded)
    throw SolverError("second stage unbounded below (model error)");
  out.feasible = true;
  out.value = res.value;
  out.subgradient = T.multiply_transposed(res.dual);
  for (double& e : out.subgradient) e = -e;
  return out;
}

double second_stage_value(const Matrix& W, const Matrix& T, const Vector& h, const Vector& g,
                          const Vector& x) {
  return second_stage_eval(W, T, h, g, x).value;
}

bool cone_contains(const ConeGenerators& gen, const Vector& v) {
  if (static_cast<int>(v.size()) != gen.dim)
    throw std::invalid_argument("cone_contains: dimension mismatch");
  const int k = static_cast<int>(gen.rays.size());
  const int l = static_cast<int>(gen.lineality.size());
  if (k == 0 && l == 0) {
    return norm2(v) <= kFarkasTol;
  }
  LPProblem lp;
  lp.c.assign(static_cast<std::size_t>(k + l), 0.0);
  lp.A = Matrix(gen.dim, k + l);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < gen.dim; ++i) lp.A(i, j) = gen.rays[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  for (int j = 0; j < l; ++j)
    for (int i = 0; i < gen.dim; ++i)
      lp.A(i, k + j) = gen.lineality[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  lp.b = v;
  lp.sense.assign(static_cast<std::size_t>(gen.dim), RowSense::eq);
  lp.lower.assign(static_cast<std::size_t>(k + l), 0.0);
  lp.upper.assign(static_cast<std::size_t>(k + l), std::numeric_limits<double>::infinity());
  for (int j = 0; j < l; ++j) lp.lower[static_cast<std::size_t>(k + j)] = -std::numeric_limits<double>::infinity();
  return lp_feasible(lp);
}

void verify_generators(const ConeGenerators& gen, const Matrix& W) {
  for (const Vector& r : gen.rays) {
    for (int j = 0; j < W.cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < W.rows; ++i) s += r[static_cast<std::size_t>(i)] * W(i, j);
      if (s < -kRankTol) throw std::logic_error("verify_generators: ray violates inequality");
    }
    if (std::abs(norm2(r) - 1.0) > 1e-9)
      throw std::logic_error("verify_generators: ray not unit norm");
  }
  for (const Vector& lvec : gen.lineality) {
    for (int j = 0; j < W.cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < W.rows; ++i) s += lvec[static_cast<std::size_t>(i)] * W(i, j);
      if (std::abs(s) > kRankTol)
        throw std::logic_error("verify_generators: lineality vector not in kernel");
    }
  }
  // Minimality: removing any ray must strictly shrink the cone.
  for (std::size_t drop = 0; drop < gen.rays.size(); ++drop) {
    ConeGenerators reduced;
    reduced.dim = gen.dim;
    reduced.lineality = gen.lineality;
    for (std::size_t i = 0; i < gen.rays.size(); ++i)
      if (i != drop) reduced.rays.push_back(gen.rays[i]);
    if (cone_contains(reduced, gen.rays[drop]))
      throw std::logic_error("verify_generators: ray list not minimal");
  }
}

}  // namespace feaslab
