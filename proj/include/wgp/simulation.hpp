#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wgp/gp.hpp"

namespace wgp {

struct MaternConfig {
  double sigma = 1.0;
  double ell = 0.2;
};

/// Sizes, grids and seeds for the simulation study. table1/table2/beta
/// presets reproduce the published experiment dimensions.
struct SimConfig {
  int n_train = 100;
  int n_test = 500;
  int density_grid = 100;   // d points on [0,1]
  int quantile_grid = 512;  // m
  MaternConfig matern;
  std::uint64_t seed = 0;
  int samples_per_dist = 500;  // two-stage sampling
  std::vector<int> projection_orders = {5, 10, 15};
  int n_starts = 10;
  int max_evals = 400;
  int threads = 1;

  static SimConfig table1_defaults();
  static SimConfig table2_defaults();
  static SimConfig beta_defaults();
};

struct BenchmarkRow {
  std::string model;
  double rmse_value = 0.0;
  std::optional<double> cir90;  // absent for predictors without a variance
  std::map<std::string, double> params;
  double wall_seconds = 0.0;
  std::vector<double> truths;
  std::vector<double> preds;
  std::vector<double> sds;  // empty when cir90 is absent
};

struct BenchmarkReport {
  std::string name;
  std::vector<BenchmarkRow> rows;
  std::map<std::string, std::string> metadata;

  const BenchmarkRow* find(const std::string& model) const;
};

/// One draw of a zero-mean Gaussian process on `grid` with the Matern 5/2
/// covariance sigma^2 (1 + sqrt5 d/ell + 5d^2/(3 ell^2)) exp(-sqrt5 d/ell).
Eigen::VectorXd matern52_sample(const Eigen::VectorXd& grid, double ell,
                                double sigma, std::uint64_t seed);

/// Learning distribution of the simulation study: a Gaussian density with
/// uniform random mean in [0.3,0.7] and sd in [0.001,0.2], perturbed by the
/// exponential of a Matern 5/2 draw and renormalized on [0,1].
GridDensity gen_learning_distribution(const SimConfig& cfg, std::uint64_t seed);

/// Same construction with the perturbation field supplied directly (the
/// z = 0 case recovers the truncated-renormalized Gaussian pdf).
GridDensity gen_learning_distribution_with_field(const SimConfig& cfg,
                                                 double mean, double sd,
                                                 const Eigen::VectorXd& z);

/// Target functional m1 / (0.05 + sqrt(m2 - m1^2)).
double target_F(const QuantileFunction& q);

/// Gaussian kernel density estimate on `grid`, renormalized on the grid.
/// bandwidth <= 0 selects Silverman's rule 1.06 sd n^{-1/5}; a zero sample
/// variance falls back to bandwidth 1e-3.
GridDensity kde_density(std::span<const double> samples, double bandwidth,
                        const Eigen::VectorXd& grid);

/// Nadaraya-Watson predictor over L1 distances between tabulated densities,
/// with a Gaussian kernel. The bandwidth is picked by validation RMSE on a
/// seeded 80/20 split of the training set over `bandwidth_grid` (empty:
/// median pairwise distance times 2^k, k = -4..4). An underflowing weight
/// denominator falls back to the training mean.
std::vector<double> kernel_regression_predict(
    const std::vector<GridDensity>& train_densities,
    const Eigen::VectorXd& train_y, const std::vector<GridDensity>& test_densities,
    std::span<const double> bandwidth_grid, std::uint64_t split_seed);

/// Skewness of Beta(a, b).
double beta_skewness(double a, double b);

/// Draws `count` Beta(a, b) samples.
std::vector<double> beta_samples(double a, double b, int count, Rng& rng);

/// Inverse-CDF sampling from a tabulated density.
std::vector<double> sample_from_density(const GridDensity& g, int count,
                                        Rng& rng);

/// The "skewness of Beta" two-stage experiment: Gaussian-process regression
/// on empirical quantiles against the kernel-regression baseline on KDE
/// densities.
BenchmarkReport beta_skewness_experiment(const SimConfig& cfg);

/// Exact-density benchmark: the W2 Gaussian-process model against Legendre
/// and PCA projection models.
BenchmarkReport table1_benchmark(const SimConfig& cfg);

/// Two-stage benchmark: every input observed through samples_per_dist draws;
/// powexp+nugget Gaussian process against kernel regression.
BenchmarkReport table2_benchmark(const SimConfig& cfg);

/// Independent random measures with shifted supports: the i-th density is
/// exp(Z_i(t-i))/M_i on [i, i+L]. The increasing-domain input array of the
/// asymptotic theory.
std::vector<GridDensity> shifted_random_measures(int n, double len,
                                                 const MaternConfig& cfg,
                                                 int grid_points,
                                                 std::uint64_t seed);

}  // namespace wgp
