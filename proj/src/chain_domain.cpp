#include "feaslab/chain_domain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace feaslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// One fresh threshold row under the spec's coupling, written into row[0..m).
void draw_row(const ChainDomainSpec& spec, RngStream& s, double* row) {
  const int m = spec.order();
  if (spec.independent_thresholds) {
    for (int k = 0; k < m; ++k) row[k] = spec.chains[static_cast<std::size_t>(k)].law.sample(s);
  } else {
    double u = s.uniform_open01();
    for (int k = 0; k < m; ++k)
      row[k] = spec.chains[static_cast<std::size_t>(k)].law.quantile_beta(u);
  }
}

}  // namespace

ConstraintFn ConstraintFn::affine(Vector a, double b) {
  require(!a.empty(), "affine: empty coefficient vector");
  for (double v : a) require(std::isfinite(v), "affine: non-finite coefficient");
  require(std::isfinite(b), "affine: non-finite offset");
  ConstraintFn f;
  f.kind_ = Kind::affine;
  f.dim_ = static_cast<int>(a.size());
  f.a_ = std::move(a);
  f.b_ = b;
  return f;
}

ConstraintFn ConstraintFn::quadratic(Matrix Q, Vector a, double b) {
  const int n = static_cast<int>(a.size());
  require(n >= 1, "quadratic: empty linear part");
  require(Q.rows == n && Q.cols == n, "quadratic: Q dimension mismatch");
  require(Q.finite(), "quadratic: non-finite Q");
  require(std::isfinite(b), "quadratic: non-finite offset");
  // Symmetrize, then verify positive semidefiniteness within 1e-9.
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) = 0.5 * (Q(i, j) + Q(j, i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  double lmax = std::max(1.0, std::abs(es.eigenvalues().maxCoeff()));
  require(lmin >= -1e-9 * lmax, "quadratic: Q is not positive semidefinite");

  ConstraintFn f;
  f.kind_ = Kind::quadratic;
  f.dim_ = n;
  f.Q_ = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f.Q_(i, j) = S(i, j);
  f.a_ = std::move(a);
  f.b_ = b;
  return f;
}

ConstraintFn ConstraintFn::norm_ball(Vector center) {
  require(!center.empty(), "norm_ball: empty center");
  for (double v : center) require(std::isfinite(v), "norm_ball: non-finite center");
  ConstraintFn f;
  f.kind_ = Kind::norm;
  f.dim_ = static_cast<int>(center.size());
  f.center_ = std::move(center);
  return f;
}

double ConstraintFn::eval(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == dim_, "ConstraintFn::eval: dimension mismatch");
  switch (kind_) {
    case Kind::affine:
      return dot(a_, x) + b_;
    case Kind::quadratic: {
      double s = b_ + dot(a_, x);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) s += x[static_cast<std::size_t>(i)] * Q_(i, j) * x[static_cast<std::size_t>(j)];
      return s;
    }
    case Kind::norm: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) {
        double d = x[static_cast<std::size_t>(i)] - center_[static_cast<std::size_t>(i)];
        s += d * d;
      }
      return std::sqrt(s);
    }
  }
  return 0.0;
}

Vector ConstraintFn::subgradient(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == dim_, "ConstraintFn::subgradient: dimension mismatch");
  switch (kind_) {
    case Kind::affine:
      return a_;
    case Kind::quadratic: {
      Vector g = a_;
      for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += Q_(i, j) * x[static_cast<std::size_t>(j)];
        g[static_cast<std::size_t>(i)] += 2.0 * s;
      }
      return g;
    }
    case Kind::norm: {
      Vector g(static_cast<std::size_t>(dim_), 0.0);
      double n = 0.0;
      for (int i = 0; i < dim_; ++i) {
        g[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - center_[static_cast<std::size_t>(i)];
        n += g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
      }
      n = std::sqrt(n);
      if (n > 0.0)
        for (double& e : g) e /= n;
      return g;
    }
  }
  return {};
}

void ChainDomainSpec::validate() const {
  require(dim >= 1, "ChainDomainSpec: dim >= 1 required");
  require(!chains.empty(), "ChainDomainSpec: at least one chain required (m >= 1)");
  for (const ChainLink& link : chains) {
    require(link.fn.dim() == dim, "ChainDomainSpec: constraint dimension mismatch");
    require(std::isfinite(link.law.essential_infimum()),
            "ChainDomainSpec: threshold law must have finite essential infimum");
  }
}

Vector ChainDomainSpec::essential_thresholds() const {
  Vector t;
  t.reserve(chains.size());
  for (const ChainLink& link : chains) t.push_back(link.law.essential_infimum());
  return t;
}

Vector ThresholdSample::recompute_minima() const {
  Vector mins(static_cast<std::size_t>(m), kInf);
  for (std::int64_t i = 0; i < N; ++i)
    for (int k = 0; k < m; ++k)
      mins[static_cast<std::size_t>(k)] = std::min(mins[static_cast<std::size_t>(k)], value(i, k));
  return mins;
}

ThresholdSample sample_thresholds(const ChainDomainSpec& spec, std::int64_t N,
                                  const SeedSpec& seed) {
  require(N >= 1, "sample_thresholds: N >= 1 required");
  spec.validate();
  const int m = spec.order();

  ThresholdSample out;
  out.N = N;
  out.m = m;
  out.values.resize(static_cast<std::size_t>(N) * m);

  RngStream root = make_stream(seed);
  if (spec.independent_thresholds) {
    // One substream per chain: perturbing one law leaves the other columns'
    // draws untouched under a shared seed.
    for (int k = 0; k < m; ++k) {
      RngStream col = root.substream(static_cast<std::uint64_t>(k) + 1);
      const ScalarDistribution& law = spec.chains[static_cast<std::size_t>(k)].law;
      for (std::int64_t i = 0; i < N; ++i)
        out.values[static_cast<std::size_t>(i) * m + k] = law.sample(col);
    }
  } else {
    RngStream drv = root.substream(0);
    out.drivers.resize(static_cast<std::size_t>(N));
    for (std::int64_t i = 0; i < N; ++i) {
      double u = drv.uniform_open01();
      out.drivers[static_cast<std::size_t>(i)] = u;
      for (int k = 0; k < m; ++k)
        out.values[static_cast<std::size_t>(i) * m + k] =
            spec.chains[static_cast<std::size_t>(k)].law.quantile_beta(u);
    }
  }
  out.minima = out.recompute_minima();
  return out;
}

ThresholdSample append_rows(const ThresholdSample& base, const ThresholdSample& extra) {
  require(base.m == extra.m, "append_rows: chain count mismatch");
  ThresholdSample out = base;
  out.N = base.N + extra.N;
  out.values.insert(out.values.end(), extra.values.begin(), extra.values.end());
  if (!base.drivers.empty() && !extra.drivers.empty())
    out.drivers.insert(out.drivers.end(), extra.drivers.begin(), extra.drivers.end());
  else
    out.drivers.clear();
  for (int k = 0; k < out.m; ++k)
    out.minima[static_cast<std::size_t>(k)] =
        std::min(base.minima[static_cast<std::size_t>(k)], extra.minima[static_cast<std::size_t>(k)]);
  return out;
}

bool domain_contains(const ChainDomainSpec& spec, std::span<const double> x,
                     std::span<const double> thresholds) {
  require(static_cast<int>(x.size()) == spec.dim, "domain_contains: point dimension mismatch");
  require(static_cast<int>(thresholds.size()) == spec.order(),
          "domain_contains: threshold count mismatch");
  for (int k = 0; k < spec.order(); ++k) {
    if (thresholds[static_cast<std::size_t>(k)] == kInf) continue;
    if (spec.chains[static_cast<std::size_t>(k)].fn.eval(x) > thresholds[static_cast<std::size_t>(k)])
      return false;
  }
  return true;
}

ProbEstimate dof_point(const ChainDomainSpec& spec, std::span<const double> x, Analytic) {
  require(spec.independent_thresholds,
          "dof_point: analytic mode requires independent thresholds");
  require(static_cast<int>(x.size()) == spec.dim, "dof_point: dimension mismatch");
  double p = 1.0;
  for (const ChainLink& link : spec.chains) p *= link.law.prob_ge(link.fn.eval(x));
  return {p, 0.0};
}

ProbEstimate dof_point(const ChainDomainSpec& spec, std::span<const double> x,
                       const MonteCarlo& mc) {
  require(static_cast<int>(x.size()) == spec.dim, "dof_point: dimension mismatch");
  const int m = spec.order();
  Vector cvals(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    cvals[static_cast<std::size_t>(k)] = spec.chains[static_cast<std::size_t>(k)].fn.eval(x);
  Vector row(static_cast<std::size_t>(m));
  return detail::mc_probability(mc, [&](RngStream& s) {
    draw_row(spec, s, row.data());
    for (int k = 0; k < m; ++k)
      if (cvals[static_cast<std::size_t>(k)] > row[static_cast<std::size_t>(k)]) return false;
    return true;
  });
}

ProbEstimate dfrak_r(const ChainDomainSpec& spec, const ThresholdSample& sample, Analytic) {
  require(spec.independent_thresholds, "dfrak_r: analytic mode requires independent thresholds");
  double p = 1.0;
  for (int k = 0; k < spec.order(); ++k)
    p *= spec.chains[static_cast<std::size_t>(k)].law.prob_ge(sample.minima[static_cast<std::size_t>(k)]);
  return {p, 0.0};
}

ProbEstimate dfrak_r(const ChainDomainSpec& spec, const ThresholdSample& sample,
                     const MonteCarlo& mc) {
  const int m = spec.order();
  Vector row(static_cast<std::size_t>(m));
  return detail::mc_probability(mc, [&](RngStream& s) {
    draw_row(spec, s, row.data());
    for (int k = 0; k < m; ++k)
      if (row[static_cast<std::size_t>(k)] < sample.minima[static_cast<std::size_t>(k)]) return false;
    return true;
  });
}

ProbEstimate dof_domain(const ChainDomainSpec& spec, const ThresholdSample& sample,
                        const MonteCarlo& mc) {
  return dfrak_r(spec, sample, mc);
}

double dof_point_comonotone_exact(const ChainDomainSpec& spec, std::span<const double> x) {
  require(!spec.independent_thresholds, "dof_point_comonotone_exact: spec is independent");
  double p = 1.0;
  for (const ChainLink& link : spec.chains)
    p = std::min(p, link.law.prob_ge(link.fn.eval(x)));
  return p;
}

double dfrak_r_comonotone_exact(const ChainDomainSpec& spec, const ThresholdSample& sample) {
  require(!spec.independent_thresholds, "dfrak_r_comonotone_exact: spec is independent");
  double p = 1.0;
  for (int k = 0; k < spec.order(); ++k)
    p = std::min(p, spec.chains[static_cast<std::size_t>(k)].law.prob_ge(
                        sample.minima[static_cast<std::size_t>(k)]));
  return p;
}

}  // namespace feaslab
