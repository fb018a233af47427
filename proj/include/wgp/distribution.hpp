#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "wgp/common.hpp"

namespace wgp {

/// A one-dimensional distribution represented by its quantile function
/// discretized on the midpoint grid of (0,1): values[k] approximates
/// F^{-1}((k+1/2)/m). This is the universal representation: the quadratic
/// Wasserstein distance between two distributions on the same grid is the
/// plain root-mean-square distance between their value arrays.
class QuantileFunction {
 public:
  /// Takes ownership of the values; throws invalid_input unless the array is
  /// non-empty, finite and non-decreasing.
  explicit QuantileFunction(Eigen::VectorXd values);

  int grid_size() const { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }

  /// Midpoint grid node (k+1/2)/m.
  static double grid_point(int k, int m) { return (k + 0.5) / m; }

  bool operator==(const QuantileFunction& other) const {
    return values_.size() == other.values_.size() && values_ == other.values_;
  }

 private:
  Eigen::VectorXd values_;
};

/// Finitely supported sample data, optionally weighted. Empty weights mean
/// uniform 1/n.
struct EmpiricalDistribution {
  std::vector<double> samples;
  std::vector<double> weights;

  /// Throws invalid_input if empty, or if weights are present but do not
  /// form a probability vector (positive, summing to 1 within 1e-12).
  void validate() const;
};

/// A density tabulated at d equispaced abscissae spanning [support_lo,
/// support_hi]. Construction enforces non-negativity and unit trapezoid mass
/// (within 1e-8), so a GridDensity is always a valid probability density.
class GridDensity {
 public:
  GridDensity(double support_lo, double support_hi, Eigen::VectorXd density);

  /// Rescales `raw` by its trapezoid integral before constructing; the usual
  /// entry point for generated or estimated densities.
  static GridDensity normalized(double support_lo, double support_hi,
                                Eigen::VectorXd raw);

  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  int size() const { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  double dx() const { return (hi_ - lo_) / (values_.size() - 1); }
  double abscissa(int j) const { return lo_ + j * dx(); }

 private:
  double lo_, hi_;
  Eigen::VectorXd values_;
};

/// First and second raw moments.
struct Moments {
  double m1 = 0.0;
  double m2 = 0.0;
};

/// Trapezoid quadrature of samples f at spacing dx.
double trapezoid(const Eigen::VectorXd& f, double dx);

/// Right-continuous generalized inverse inf{u : F(u) >= t} of the weighted
/// empirical CDF, evaluated at the m midpoint grid nodes. Point masses stay
/// point masses: no interpolation between atoms.
QuantileFunction quantile_from_samples(const EmpiricalDistribution& e, int m);

/// Quantiles of a tabulated density: the CDF is accumulated by the trapezoid
/// rule and inverted by monotone piecewise-linear interpolation.
QuantileFunction quantile_from_density(const GridDensity& g, int m);

/// Quantiles of a tabulated density at arbitrary probabilities ts in (0,1).
/// Shares the CDF-inversion core with quantile_from_density; also used to
/// draw samples from a GridDensity by inverse-CDF sampling.
Eigen::VectorXd density_quantiles(const GridDensity& g,
                                  const Eigen::VectorXd& ts);

/// Quadratic Wasserstein distance between two distributions on a common
/// grid: sqrt((1/m) * sum_k (a_k - b_k)^2). Exact for the discretized
/// measures because the quantile coupling is optimal on the line.
double w2_distance(const QuantileFunction& a, const QuantileFunction& b);

/// Brute-force W2 between uniform empirical measures of equal size n <= 8:
/// minimizes the assignment cost over all n! pairings. Test oracle only.
double w2_oracle_discrete(std::span<const double> xs,
                          std::span<const double> ys);

/// First two raw moments by midpoint quadrature of the quantile values.
Moments moments_of(const QuantileFunction& q);

/// Push-forward by the translation x -> x + c.
QuantileFunction shift(const QuantileFunction& q, double c);

}  // namespace wgp
