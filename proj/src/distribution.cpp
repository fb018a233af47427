#include "wgp/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wgp {

QuantileFunction::QuantileFunction(Eigen::VectorXd values)
    : values_(std::move(values)) {
  if (values_.size() == 0) throw invalid_input("quantile grid must be non-empty");
  if (!values_.allFinite()) throw invalid_input("quantile values must be finite");
  for (Eigen::Index k = 1; k < values_.size(); ++k) {
    if (values_[k] < values_[k - 1])
      throw invalid_input("quantile values must be non-decreasing");
  }
}

void EmpiricalDistribution::validate() const {
  if (samples.empty()) throw invalid_input("empirical distribution with no samples");
  for (double s : samples) {
    if (!std::isfinite(s)) throw invalid_input("sample values must be finite");
  }
  if (!weights.empty()) {
    if (weights.size() != samples.size())
      throw invalid_input("weights and samples must have equal length");
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw invalid_input("weights must be strictly positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw invalid_input("weights must sum to 1 within 1e-12");
  }
}

double trapezoid(const Eigen::VectorXd& f, double dx) {
  if (f.size() < 2) throw invalid_input("trapezoid needs at least two nodes");
  return dx * (f.sum() - 0.5 * (f[0] + f[f.size() - 1]));
}

GridDensity::GridDensity(double support_lo, double support_hi,
                         Eigen::VectorXd density)
    : lo_(support_lo), hi_(support_hi), values_(std::move(density)) {
  if (!(std::isfinite(lo_) && std::isfinite(hi_) && lo_ < hi_))
    throw invalid_input("density support must satisfy lo < hi");
  if (values_.size() < 2) throw invalid_input("density needs at least two nodes");
  if (!values_.allFinite()) throw invalid_input("density values must be finite");
  if ((values_.array() < 0.0).any())
    throw invalid_input("density values must be non-negative");
  const double mass = trapezoid(values_, dx());
  if (std::abs(mass - 1.0) > 1e-8)
    throw invalid_input("density must integrate to 1 within 1e-8 (got " +
                        std::to_string(mass) + ")");
}

GridDensity GridDensity::normalized(double support_lo, double support_hi,
                                    Eigen::VectorXd raw) {
  if (raw.size() < 2) throw invalid_input("density needs at least two nodes");
  if (!raw.allFinite()) throw invalid_input("density values must be finite");
  if ((raw.array() < 0.0).any())
    throw invalid_input("density values must be non-negative");
  const double dx = (support_hi - support_lo) / (raw.size() - 1);
  const double mass = trapezoid(raw, dx);
  if (!(mass > 0.0)) throw invalid_input("density has zero mass");
  raw /= mass;
  return GridDensity(support_lo, support_hi, std::move(raw));
}

QuantileFunction quantile_from_samples(const EmpiricalDistribution& e, int m) {
  e.validate();
  if (m < 1) throw invalid_input("grid size must be positive");
  const std::size_t n = e.samples.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return e.samples[a] < e.samples[b];
  });

  // Cumulative weights normalized by the total so the last entry is 1 up to
  // rounding; the midpoint grid keeps every target probability strictly
  // below 1.
  std::vector<double> cum(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    total += e.weights.empty() ? 1.0 : e.weights[order[j]];
    cum[j] = total;
  }
  for (std::size_t j = 0; j < n; ++j) cum[j] /= total;

  Eigen::VectorXd vals(m);
  std::size_t j = 0;
  for (int k = 0; k < m; ++k) {
    const double t = QuantileFunction::grid_point(k, m);
    while (cum[j] < t && j + 1 < n) ++j;
    vals[k] = e.samples[order[j]];
  }
  return QuantileFunction(std::move(vals));
}

namespace {

// Normalized cumulative trapezoid of a valid density; F[0] = 0, F[d-1] = 1.
Eigen::VectorXd density_cdf(const GridDensity& g) {
  const Eigen::VectorXd& f = g.values();
  const double dx = g.dx();
  Eigen::VectorXd cdf(f.size());
  cdf[0] = 0.0;
  for (Eigen::Index j = 1; j < f.size(); ++j)
    cdf[j] = cdf[j - 1] + 0.5 * dx * (f[j - 1] + f[j]);
  cdf /= cdf[f.size() - 1];
  return cdf;
}

double invert_cdf(const GridDensity& g, const Eigen::VectorXd& cdf, double t) {
  // First node with F >= t; flat (zero-density) stretches are skipped, which
  // realizes the right-continuous inverse.
  const double* begin = cdf.data();
  const double* end = cdf.data() + cdf.size();
  const double* it = std::lower_bound(begin, end, t);
  if (it == begin) return g.support_lo();
  if (it == end) return g.support_hi();
  const Eigen::Index j = it - begin;
  const double f_lo = cdf[j - 1];
  const double f_hi = cdf[j];
  const double x = g.abscissa(static_cast<int>(j - 1)) +
                   g.dx() * (t - f_lo) / (f_hi - f_lo);
  return std::clamp(x, g.support_lo(), g.support_hi());
}

}  // namespace

Eigen::VectorXd density_quantiles(const GridDensity& g,
                                  const Eigen::VectorXd& ts) {
  const Eigen::VectorXd cdf = density_cdf(g);
  Eigen::VectorXd out(ts.size());
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0 && ts[i] < 1.0))
      throw invalid_input("quantile probabilities must lie in (0,1)");
    out[i] = invert_cdf(g, cdf, ts[i]);
  }
  return out;
}

QuantileFunction quantile_from_density(const GridDensity& g, int m) {
  if (m < 1) throw invalid_input("grid size must be positive");
  const Eigen::VectorXd cdf = density_cdf(g);
  Eigen::VectorXd vals(m);
  for (int k = 0; k < m; ++k)
    vals[k] = invert_cdf(g, cdf, QuantileFunction::grid_point(k, m));
  // Clamp out any rounding-level inversions before the monotonicity check.
  for (int k = 1; k < m; ++k) vals[k] = std::max(vals[k], vals[k - 1]);
  return QuantileFunction(std::move(vals));
}

double w2_distance(const QuantileFunction& a, const QuantileFunction& b) {
  if (a.grid_size() != b.grid_size())
    throw invalid_input("w2_distance: quantile grid sizes differ");
  const Eigen::VectorXd diff = a.values() - b.values();
  return std::sqrt(diff.squaredNorm() / a.grid_size());
}

double w2_oracle_discrete(std::span<const double> xs,
                          std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw invalid_input("w2_oracle_discrete: lengths differ");
  const std::size_t n = xs.size();
  if (n == 0) throw invalid_input("w2_oracle_discrete: empty input");
  if (n > 8) throw invalid_input("w2_oracle_discrete: refusing n > 8");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = xs[i] - ys[perm[i]];
      cost += d * d;
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / n);
}

Moments moments_of(const QuantileFunction& q) {
  Moments mo;
  mo.m1 = q.values().mean();
  mo.m2 = q.values().array().square().mean();
  return mo;
}

QuantileFunction shift(const QuantileFunction& q, double c) {
  return QuantileFunction(q.values().array() + c);
}

}  // namespace wgp
