#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wgp/kernels.hpp"

namespace wgp {

/// How an input distribution was obtained; empirical inputs carry their
/// sample count.
struct Provenance {
  enum class Kind { density, empirical };
  Kind kind = Kind::density;
  int sample_count = 0;
};

/// Training data: quantile-discretized inputs and scalar targets. The
/// original grid densities are kept alongside when available, because the
/// projection (Legendre/PCA) kernels derive their features from densities
/// rather than from quantile functions.
struct Dataset {
  std::vector<QuantileFunction> inputs;
  Eigen::VectorXd targets;
  std::vector<Provenance> meta;         // empty or one entry per input
  std::vector<GridDensity> densities;   // empty or one entry per input

  int size() const { return static_cast<int>(inputs.size()); }
  void validate(bool for_fit = false) const;
};

struct ParamBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Controls for maximum-likelihood fitting. Bound overrides replace the
/// scale-aware defaults (sigma2 in [1e-6,1e4]*var(y), ell spanning
/// [1e-3,1e3] times the median pairwise distance raised to 2H over the H
/// box, H in [0.01,1] ([0.01,0.99] for fbm), delta in [~0,10*var(y)]).
struct FitConfig {
  std::optional<ParamBounds> sigma2_bounds;
  std::optional<ParamBounds> ell_bounds;
  std::optional<ParamBounds> h_bounds;
  std::optional<ParamBounds> delta_bounds;
  std::optional<ParamBounds> feature_ell_bounds;

  int n_starts = 10;
  int max_evals = 400;  // per start
  std::uint64_t seed = 0;
  double jitter = 1e-10;  // relative to the mean Gram diagonal

  enum class Nugget { off, fit, fixed };
  Nugget nugget = Nugget::off;
  double nugget_value = 0.0;  // used with Nugget::fixed

  bool center_targets = true;
  int order = 5;                        // projection variants
  bool pca_centered_projection = false;
  std::optional<QuantileFunction> fbm_origin;  // default: point mass at 0
  int threads = 1;
};

/// A fitted Gaussian-process model. `chol` is the lower Cholesky factor of
/// the covariance matrix at the selected parameters (including the jitter
/// actually used) and `alpha` solves R alpha = y - offset.
struct GPModel {
  KernelSpec spec;
  std::vector<QuantileFunction> inputs;
  std::vector<FeatureVector> features;  // projection variants only
  Eigen::MatrixXd chol;
  Eigen::VectorXd alpha;
  double loglik = 0.0;  // attained value of L = (1/n)(ln det R + y'R^{-1}y)
  double jitter_used = 0.0;    // absolute value added to the diagonal
  double jitter_config = 0.0;  // configured relative jitter, kept for rebuilds
  double target_offset = 0.0;
  double grad_norm = 0.0;  // projected gradient at the optimum, transformed coords
  std::vector<int> free_params;  // indices into kernel_param_names(spec)

  int size() const { return static_cast<int>(inputs.size()); }
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct NllResult {
  double value = 0.0;
  double jitter_used = 0.0;
};

/// Full parameter list of a kernel variant, in the documented order:
/// powexp (sigma2, ell, h, delta); legendre/pca (sigma2, ell_0..ell_{o-1},
/// h); fbm (h).
std::vector<std::string> kernel_param_names(const KernelSpec& spec);
Eigen::VectorXd kernel_param_values(const KernelSpec& spec);
KernelSpec kernel_with_params(const KernelSpec& spec, const Eigen::VectorXd& p);

/// Symmetric Gram matrix of kernel evaluations. Pairwise W2 distances are
/// computed once (O(n^2 m)) so parameter sweeps stay O(n^2).
Eigen::MatrixXd build_gram(const KernelSpec& spec,
                           const std::vector<QuantileFunction>& inputs,
                           int threads = 1);

/// Gram matrix of a projection kernel over precomputed features.
Eigen::MatrixXd build_gram(const KernelSpec& spec,
                           const std::vector<FeatureVector>& features);

/// Elementwise derivative matrices dR/dtheta_i for every canonical
/// parameter, in kernel_param_names order.
std::vector<Eigen::MatrixXd> gram_derivatives(
    const KernelSpec& spec, const std::vector<QuantileFunction>& inputs,
    int threads = 1);
std::vector<Eigen::MatrixXd> gram_derivatives(
    const KernelSpec& spec, const std::vector<FeatureVector>& features);

/// Negative log-likelihood L = (1/n) ln det R + (1/n) y'R^{-1}y via
/// Cholesky, with the escalating-jitter policy (start jitter*mean(diag),
/// multiply by 10, at most 3 escalations, then fail carrying the smallest
/// eigenvalue).
NllResult neg_log_lik(const KernelSpec& spec, const Dataset& data,
                      double jitter = 1e-10);

/// Analytic gradient of L with respect to the canonical parameters (raw
/// coordinates). dL/dt_i = (1/n)(tr(R^{-1} dR_i) - a' dR_i a), a = R^{-1}y.
Eigen::VectorXd neg_log_lik_grad(const KernelSpec& spec, const Dataset& data,
                                 double jitter = 1e-10);

/// Maximum-likelihood fit: multi-start local optimization in transformed
/// coordinates (log for positive parameters, scaled logit for H), L-BFGS
/// where analytic gradients are stable and Nelder-Mead for fbm.
/// Deterministic for a fixed seed; the attained L never exceeds the value at
/// any start.
GPModel fit_ml(const Dataset& data, KernelFamily family, const FitConfig& cfg);

/// Posterior mean and variance at a query distribution (W2 kernels).
Prediction predict(const GPModel& model, const QuantileFunction& query);

/// Posterior mean and variance at query features (projection kernels).
Prediction predict(const GPModel& model, const FeatureVector& query);

/// Features of a query density under the model's projection spec.
FeatureVector model_features(const GPModel& model, const GridDensity& g);

struct InfoMatrix {
  Eigen::MatrixXd m;
  std::vector<std::string> param_names;
  Eigen::VectorXd eigenvalues;
};

/// Fisher-type matrix (M)_{ij} = tr(R^{-1} dR_i R^{-1} dR_j) / (2n) at the
/// fitted parameters, over the model's free parameters.
InfoMatrix info_matrix(const GPModel& model);

/// Same matrix for an arbitrary spec and parameter subset; used by tests
/// and diagnostics.
InfoMatrix info_matrix_for(const KernelSpec& spec,
                           const std::vector<QuantileFunction>& inputs,
                           const std::vector<FeatureVector>& features,
                           const std::vector<int>& param_idx, double jitter);

double rmse(std::span<const double> preds, std::span<const double> truths);

/// Fraction of test points whose error lies within q * sd, where q is the
/// (1/2 + alpha/2) standard-normal quantile; the comparison is inclusive.
double cir(std::span<const double> preds, std::span<const double> sds,
           std::span<const double> truths, double alpha);

/// Transformed (log / scaled-logit) coordinates used by the optimizer;
/// exposed for consistency experiments that measure estimation error in
/// these coordinates.
Eigen::VectorXd to_transformed_coords(const KernelSpec& spec,
                                      const std::vector<int>& param_idx);

}  // namespace wgp
