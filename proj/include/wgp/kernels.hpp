#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "wgp/distribution.hpp"

namespace wgp {

/// Fractional Brownian covariance on distribution space,
///   K(a,b) = (W2^{2H}(o,a) + W2^{2H}(o,b) - W2^{2H}(a,b)) / 2,
/// with origin measure o. Valid covariance for 0 < H <= 1; nondegenerate
/// exactly when 0 < H < 1, so fitting restricts H to [0.01, 0.99] while
/// diagnostics may probe the H = 1 boundary.
struct FbmSpec {
  double h = 0.5;
  QuantileFunction origin;
};

/// Power-exponential covariance, stationary in the Wasserstein distance:
///   K(a,b) = sigma2 * exp(-W2(a,b)^{2H} / ell) + delta * 1{W2(a,b) = 0}.
/// The nugget indicator tests exact equality of the discretized quantile
/// arrays; a tolerance would silently destroy positive definiteness.
struct PowexpSpec {
  double sigma2 = 1.0;
  double ell = 1.0;
  double h = 0.5;
  double delta = 0.0;
};

/// Projection scores of one distribution, a point in R^o.
struct FeatureVector {
  Eigen::VectorXd coeffs;
};

/// Principal-component basis extracted from discretized densities.
/// Components are orthonormal rows; `project_centered` selects whether
/// projections subtract the mean vector first (components are always
/// extracted from centered data).
struct PcaBasis {
  int d = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // order x d, rows orthonormal
  bool project_centered = false;

  int order() const { return static_cast<int>(components.rows()); }
};

/// Covariance on Legendre projection scores,
///   K(a,b) = sigma2 * exp(-(sum_i |da_i| / ell_i)^H).
struct LegendreSpec {
  int order = 5;
  double sigma2 = 1.0;
  Eigen::VectorXd ells;
  double h = 0.5;
};

/// Same covariance shape on PCA projection scores; carries its basis.
struct PcaSpec {
  PcaBasis basis;
  double sigma2 = 1.0;
  Eigen::VectorXd ells;
  double h = 0.5;

  int order() const { return basis.order(); }
};

using KernelSpec = std::variant<PowexpSpec, FbmSpec, LegendreSpec, PcaSpec>;

enum class KernelFamily { fbm, powexp, legendre, pca };

KernelFamily family_of(const KernelSpec& spec);
std::string family_name(KernelFamily family);
bool is_projection(KernelFamily family);

/// Throws invalid_input when scale parameters are non-positive, H is outside
/// its variant's range, or array sizes disagree.
void validate(const KernelSpec& spec);

double fbm_kernel(const FbmSpec& spec, const QuantileFunction& a,
                  const QuantileFunction& b);
double powexp_kernel(const PowexpSpec& spec, const QuantileFunction& a,
                     const QuantileFunction& b);

/// Power-exponential value from a precomputed distance; `same_point` decides
/// the nugget indicator (callers pass w == 0, which on a common grid is
/// equivalent to array equality).
double powexp_eval(const PowexpSpec& spec, double w, bool same_point);

/// Projection kernel from per-coordinate absolute score differences.
double projection_eval(double sigma2, const Eigen::VectorXd& ells, double h,
                       const Eigen::VectorXd& coord_absdiff);

double projection_kernel(const LegendreSpec& spec, const FeatureVector& fa,
                         const FeatureVector& fb);
double projection_kernel(const PcaSpec& spec, const FeatureVector& fa,
                         const FeatureVector& fb);

/// Rows are the first `order` shifted Legendre polynomials evaluated on a
/// d-point grid over [0,1], re-orthonormalized against the trapezoid inner
/// product so that discrete orthonormality holds to machine precision.
Eigen::MatrixXd legendre_basis(int d, int order);

/// Legendre scores a_i = integral of f * p_i over [0,1] (trapezoid).
/// The density support must be [0,1].
FeatureVector legendre_features(const GridDensity& g, int order);

/// Principal components of the discretized densities (centered, top `order`
/// eigenvectors, deterministic sign: the entry of largest magnitude is
/// positive).
PcaBasis pca_fit(const std::vector<GridDensity>& densities, int order,
                 bool project_centered = false);

/// PCA scores a_i = (1/d) * dot(v, w_i) with v the tabulated density values
/// (mean-subtracted first when the basis says so).
FeatureVector pca_features(const GridDensity& g, const PcaBasis& basis);

}  // namespace wgp
