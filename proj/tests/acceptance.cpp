// Acceptance suite: end-to-end checks of the statistical contracts, one
// PASS/FAIL line per criterion clause. Run without arguments for the full
// suite, or pass a subset like `acceptance AC1 AC6`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wgp/diagnostics.hpp"
#include "wgp/gp.hpp"
#include "wgp/simulation.hpp"

using namespace wgp;

namespace {

constexpr std::uint64_t kSeed = 20260810;

struct Gate {
  int passed = 0;
  int failed = 0;

  void check(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %-34s %s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (ok)
      ++passed;
    else
      ++failed;
  }

  void info(const std::string& name, const std::string& detail) {
    std::printf("INFO %-34s %s\n", name.c_str(), detail.c_str());
    std::fflush(stdout);
  }
};

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

QuantileFunction random_quantiles(Rng& rng, int m) {
  EmpiricalDistribution e;
  const int atoms = 2 + static_cast<int>(rng.next_u64() % 5);
  for (int a = 0; a < atoms; ++a) e.samples.push_back(rng.uniform(-2.0, 2.0));
  return quantile_from_samples(e, m);
}

// ---------------------------------------------------------------------------

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void ac1(Gate& gate) {
  // Paper-scale reproduction over fresh seeds: per-model medians of RMSE
  // and CIR across five independent replicates carry the ordering/band
  // contract (the single-replicate numbers are stochastic).
  Timer timer;
  const int replicates = 5;
  std::vector<std::string> models = {
      "distribution",      "legendre order 5", "legendre order 10",
      "legendre order 15", "pca order 5",      "pca order 10",
      "pca order 15"};
  std::map<std::string, std::vector<double>> rmses, cirs;
  std::vector<double> nugget_rmses;
  for (int rep = 0; rep < replicates; ++rep) {
    SimConfig cfg = SimConfig::table1_defaults();
    cfg.seed = derive_seed(kSeed, 100 + rep);
    const BenchmarkReport report = table1_benchmark(cfg);
    std::string line;
    for (const auto& name : models) {
      const BenchmarkRow* row = report.find(name);
      rmses[name].push_back(row->rmse_value);
      cirs[name].push_back(*row->cir90);
      line += fmt(" %.3f", row->rmse_value);
    }
    nugget_rmses.push_back(report.find("distribution+nugget")->rmse_value);
    gate.info(fmt("AC-1 replicate %.0f rmse", static_cast<double>(rep)), line);
  }
  const double elapsed = timer.seconds();

  const double d_rmse = median_of(rmses["distribution"]);
  gate.check("AC-1 distribution rmse band", d_rmse >= 0.05 && d_rmse <= 0.20,
             fmt("median rmse=%.4f in [0.05,0.20]", d_rmse));

  std::vector<double> legendre, pca;
  double best_projection = 1e300;
  for (int order : {5, 10, 15}) {
    legendre.push_back(median_of(rmses["legendre order " + std::to_string(order)]));
    pca.push_back(median_of(rmses["pca order " + std::to_string(order)]));
    best_projection = std::min({best_projection, legendre.back(), pca.back()});
  }
  gate.check("AC-1 distribution beats projections",
             d_rmse < 0.5 * best_projection,
             fmt("median rmse=%.4f < 0.5 * best projection %.4f", d_rmse,
                 best_projection));
  gate.check("AC-1 legendre rmse decreases in order",
             legendre[0] > legendre[1] && legendre[1] > legendre[2],
             fmt("legendre median rmse %.4f > %.4f > %.4f", legendre[0],
                 legendre[1], legendre[2]));
  gate.check("AC-1 legendre above distribution", legendre[2] > d_rmse,
             fmt("smallest legendre median %.4f > %.4f", legendre[2], d_rmse));
  bool pca_above = true;
  for (int i = 0; i < 3; ++i) pca_above = pca_above && pca[i] > legendre[i];
  gate.check("AC-1 pca above matching legendre", pca_above,
             fmt("pca medians %.3f/%.3f/%.3f vs legendre", pca[0], pca[1],
                 pca[2]));

  bool cir_ok = true;
  double worst_low = 1.0, worst_high = 0.0;
  for (const auto& name : models) {
    const double c = median_of(cirs[name]);
    cir_ok = cir_ok && c >= 0.80 && c <= 0.97;
    worst_low = std::min(worst_low, c);
    worst_high = std::max(worst_high, c);
  }
  gate.check("AC-1 cir band", cir_ok,
             fmt("median cir90 range [%.3f, %.3f] within [0.80,0.97]",
                 worst_low, worst_high));
  gate.check("AC-1 runtime", elapsed <= 600.0, fmt("%.1f s <= 600 s", elapsed));
  gate.info("AC-1 supplementary nugget row",
            fmt("median rmse=%.4f", median_of(nugget_rmses)));
}

void ac2(Gate& gate, BenchmarkReport* out_report) {
  Timer timer;
  SimConfig cfg = SimConfig::table2_defaults();
  cfg.seed = derive_seed(kSeed, 2);
  const BenchmarkReport report = table2_benchmark(cfg);
  const double elapsed = timer.seconds();

  const BenchmarkRow* gp = report.find("distribution");
  const BenchmarkRow* kr = report.find("kernel regression");
  gate.check("AC-2 two-stage gp rmse band",
             gp->rmse_value >= 0.12 && gp->rmse_value <= 0.35,
             fmt("rmse=%.4f in [0.12,0.35]", gp->rmse_value));
  gate.check("AC-2 two-stage gp cir band",
             *gp->cir90 >= 0.85 && *gp->cir90 <= 0.95,
             fmt("cir90=%.3f in [0.85,0.95]", *gp->cir90));
  gate.check("AC-2 kernel regression ratio",
             kr->rmse_value >= 3.0 * gp->rmse_value,
             fmt("kr rmse %.4f >= 3 * %.4f", kr->rmse_value, gp->rmse_value));
  gate.check("AC-2 runtime", elapsed <= 900.0, fmt("%.1f s <= 900 s", elapsed));
  *out_report = report;
}

void ac3(Gate& gate) {
  Timer timer;
  SimConfig cfg = SimConfig::beta_defaults();
  cfg.seed = derive_seed(kSeed, 3);
  const BenchmarkReport base = beta_skewness_experiment(cfg);
  SimConfig fine = cfg;
  fine.samples_per_dist = 5000;
  const BenchmarkReport refined = beta_skewness_experiment(fine);
  const double elapsed = timer.seconds();

  const double rmse_500 = base.find("distribution")->rmse_value;
  const double rmse_5000 = refined.find("distribution")->rmse_value;
  gate.check("AC-3 beta gp rmse", rmse_500 <= 0.15,
             fmt("rmse=%.4f <= 0.15 with 500 samples", rmse_500));
  gate.check("AC-3 more samples reduce rmse", rmse_5000 < rmse_500,
             fmt("rmse %.4f (5000) < %.4f (500)", rmse_5000, rmse_500));
  gate.check("AC-3 runtime", elapsed <= 1200.0,
             fmt("%.1f s <= 1200 s", elapsed));
  gate.info("AC-3 kernel regression",
            fmt("rmse=%.4f (500 samples)",
                base.find("kernel regression")->rmse_value));
}

void ac4(Gate& gate) {
  Timer timer;
  const int n = 200, m = 512, reps = 20;
  const PowexpSpec theta0{1.0, 1.0, 0.5, 0.05};
  const std::vector<int> all_params = {0, 1, 2, 3};
  const Eigen::VectorXd z0 =
      to_transformed_coords(KernelSpec(theta0), all_params);

  std::vector<double> z_dists, z_dists_fixed;
  int l_monotone = 0;
  Eigen::Vector4i covered = Eigen::Vector4i::Zero();

  for (int rep = 0; rep < reps; ++rep) {
    const auto densities = shifted_random_measures(
        n, 0.8, MaternConfig{3.0, 0.5}, 100, derive_seed(kSeed, 400 + rep));
    Dataset data;
    for (const auto& g : densities)
      data.inputs.push_back(quantile_from_density(g, m));
    Eigen::MatrixXd r = build_gram(KernelSpec(theta0), data.inputs);
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    Rng draw(derive_seed(kSeed, 500 + rep));
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = draw.normal();
    data.targets = Eigen::MatrixXd(llt.matrixL()) * xi;

    FitConfig fc;
    fc.nugget = FitConfig::Nugget::fit;
    fc.center_targets = false;
    fc.n_starts = 10;
    fc.seed = derive_seed(kSeed, 600 + rep);
    const GPModel model = fit_ml(data, KernelFamily::powexp, fc);

    const Eigen::VectorXd z_hat =
        to_transformed_coords(model.spec, all_params);
    z_dists.push_back((z_hat - z0).norm());

    const double l_true =
        neg_log_lik(KernelSpec(theta0), data, fc.jitter).value;
    if (model.loglik <= l_true + 1e-9) ++l_monotone;

    const InfoMatrix info = info_matrix(model);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info.m);
    const Eigen::MatrixXd msqrt = eig.operatorSqrt();
    const Eigen::VectorXd err =
        std::sqrt(static_cast<double>(n)) *
        (msqrt * (kernel_param_values(model.spec) -
                  kernel_param_values(KernelSpec(theta0))));
    for (int k = 0; k < 4; ++k)
      if (std::abs(err[k]) <= 1.96) ++covered[k];

    // Supplementary: same fit with the nugget pinned to its true value.
    FitConfig fixed = fc;
    fixed.nugget = FitConfig::Nugget::fixed;
    fixed.nugget_value = theta0.delta;
    const GPModel model_fixed = fit_ml(data, KernelFamily::powexp, fixed);
    const Eigen::VectorXd zf =
        to_transformed_coords(model_fixed.spec, {0, 1, 2});
    const Eigen::VectorXd zf0 =
        to_transformed_coords(KernelSpec(theta0), {0, 1, 2});
    z_dists_fixed.push_back((zf - zf0).norm());
  }

  std::sort(z_dists.begin(), z_dists.end());
  const double median =
      0.5 * (z_dists[reps / 2 - 1] + z_dists[reps / 2]);
  gate.check("AC-4 median parameter error", median <= 0.5,
             fmt("median ||z_hat - z_0|| = %.3f <= 0.5", median));
  gate.check("AC-4 likelihood dominates truth",
             l_monotone == reps,
             fmt("L(theta_hat) <= L(theta_0) in %.0f/%.0f replicates",
                 static_cast<double>(l_monotone),
                 static_cast<double>(reps)));
  bool coverage_ok = true;
  for (int k = 0; k < 4; ++k) {
    const double frac = static_cast<double>(covered[k]) / reps;
    coverage_ok = coverage_ok && frac >= 0.80 && frac <= 1.0;
  }
  gate.check(
      "AC-4 standardized-error coverage", coverage_ok,
      fmt("per-coordinate coverage %.2f/%.2f/%.2f within [0.80,1.00] "
          "(last coordinate printed below)",
          static_cast<double>(covered[0]) / reps,
          static_cast<double>(covered[1]) / reps,
          static_cast<double>(covered[2]) / reps));
  gate.info("AC-4 delta coverage",
            fmt("%.2f", static_cast<double>(covered[3]) / reps));

  std::sort(z_dists_fixed.begin(), z_dists_fixed.end());
  gate.info("AC-4 supplementary (delta known)",
            fmt("median ||z_hat - z_0|| over (sigma2,ell,H) = %.3f",
                0.5 * (z_dists_fixed[reps / 2 - 1] + z_dists_fixed[reps / 2])));
  gate.info("AC-4 runtime", fmt("%.1f s", timer.seconds()));
}

void ac5(Gate& gate) {
  Timer timer;
  const DiagReport report = diagnose_negdef(derive_seed(kSeed, 5), 50);
  int random_checks = 0, witness_checks = 0;
  bool random_ok = true, witness_ok = true;
  for (const auto& c : report.checks) {
    if (c.name == "dirac_witness") {
      ++witness_checks;
      witness_ok = witness_ok && c.pass;
    } else {
      ++random_checks;
      random_ok = random_ok && c.pass;
    }
  }
  gate.check("AC-5 negative-definite forms", random_ok && random_checks == 200,
             fmt("%.0f random zero-sum forms non-positive within tolerance",
                 static_cast<double>(random_checks)));
  gate.check("AC-5 dirac witness positive for H>1",
             witness_ok && witness_checks == 3,
             "form 2*2^{2H}-8 > 0 at H in {1.1, 1.5, 2}");
  const double elapsed = timer.seconds();
  gate.check("AC-5 runtime", elapsed <= 30.0, fmt("%.1f s <= 30 s", elapsed));
}

void ac6(Gate& gate) {
  Timer timer;

  // W2 against the n!-permutation oracle.
  Rng rng(derive_seed(kSeed, 6));
  bool w2_ok = true;
  double w2_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = rng.uniform(-3.0, 3.0);
      ys[i] = rng.uniform(-3.0, 3.0);
    }
    const int m = n * 24;
    const auto qa = quantile_from_samples({xs, {}}, m);
    const auto qb = quantile_from_samples({ys, {}}, m);
    const double err =
        std::abs(w2_distance(qa, qb) - w2_oracle_discrete(xs, ys));
    w2_worst = std::max(w2_worst, err);
    w2_ok = w2_ok && err <= 1e-10;
  }
  gate.check("AC-6 w2 permutation oracle", w2_ok,
             fmt("worst |w2 - oracle| = %.2e <= 1e-10", w2_worst));

  // Likelihood and prediction against dense-inverse oracles.
  bool lik_ok = true, pred_ok = true;
  double lik_worst = 0.0, pred_worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    const int m = 24;
    Dataset data;
    std::vector<QuantileFunction> inputs;
    for (int i = 0; i < n; ++i) inputs.push_back(random_quantiles(rng, m));
    data.inputs = inputs;
    data.targets.resize(n);
    for (int i = 0; i < n; ++i) data.targets[i] = rng.normal();
    const PowexpSpec pe{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                        rng.uniform(0.3, 0.9), rng.uniform(0.01, 0.4)};

    const double value = neg_log_lik(KernelSpec(pe), data, 0.0).value;
    const Eigen::MatrixXd r = build_gram(KernelSpec(pe), data.inputs);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
    const double oracle = (std::log(lu.determinant()) +
                           data.targets.dot(lu.inverse() * data.targets)) /
                          n;
    const double lerr = std::abs(value - oracle) / (1.0 + std::abs(oracle));
    lik_worst = std::max(lik_worst, lerr);
    lik_ok = lik_ok && lerr <= 1e-10;

    GPModel model;
    model.spec = pe;
    model.inputs = inputs;
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    model.chol = llt.matrixL();
    model.alpha = llt.solve(data.targets);
    model.free_params = {0, 1, 2, 3};
    const auto query = random_quantiles(rng, m);
    const Prediction got = predict(model, query);
    Eigen::VectorXd rv(n);
    for (int i = 0; i < n; ++i) rv[i] = powexp_kernel(pe, query, inputs[i]);
    const Eigen::MatrixXd rinv = lu.inverse();
    const double mean_oracle = rv.dot(rinv * data.targets);
    const double var_oracle =
        std::max(pe.sigma2 + pe.delta - rv.dot(rinv * rv), 0.0);
    const double perr =
        std::abs(got.mean - mean_oracle) / (1.0 + std::abs(mean_oracle)) +
        std::abs(got.variance - var_oracle) / (1.0 + var_oracle);
    pred_worst = std::max(pred_worst, perr);
    pred_ok = pred_ok && perr <= 1e-10;
  }
  gate.check("AC-6 likelihood dense oracle", lik_ok,
             fmt("worst relative error %.2e <= 1e-10", lik_worst));
  gate.check("AC-6 prediction dense oracle", pred_ok,
             fmt("worst relative error %.2e <= 1e-10", pred_worst));

  // Analytic gradient against central finite differences.
  bool grad_ok = true;
  double grad_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_u64() % 4);
    const int m = 24;
    Dataset data;
    for (int i = 0; i < n; ++i) data.inputs.push_back(random_quantiles(rng, m));
    data.targets.resize(n);
    for (int i = 0; i < n; ++i) data.targets[i] = rng.normal();
    const PowexpSpec pe{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                        rng.uniform(0.3, 0.9), rng.uniform(0.05, 0.4)};
    const KernelSpec spec(pe);
    const Eigen::VectorXd grad = neg_log_lik_grad(spec, data, 0.0);
    const Eigen::VectorXd theta = kernel_param_values(spec);
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double h = 1e-5 * std::abs(theta[k]);
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fp = neg_log_lik(kernel_with_params(spec, tp), data, 0.0).value;
      const double fm = neg_log_lik(kernel_with_params(spec, tm), data, 0.0).value;
      const double fd = (fp - fm) / (2.0 * h);
      const double rel =
          std::abs(grad[k] - fd) / std::max({std::abs(fd), std::abs(grad[k]), 1e-6});
      grad_worst = std::max(grad_worst, rel);
      grad_ok = grad_ok && rel <= 1e-5;
    }
  }
  gate.check("AC-6 gradient finite differences", grad_ok,
             fmt("worst relative error %.2e <= 1e-5", grad_worst));
  const double elapsed = timer.seconds();
  gate.check("AC-6 runtime", elapsed <= 60.0, fmt("%.1f s <= 60 s", elapsed));
}

void ac7(Gate& gate) {
  Rng rng(derive_seed(kSeed, 7));
  const int m = 64;

  // Interpolation at the training inputs for a zero-nugget model.
  bool interp_ok = true;
  double interp_worst = 0.0;
  {
    const int n = 12;
    std::vector<QuantileFunction> inputs;
    while (static_cast<int>(inputs.size()) < n) {
      auto q = random_quantiles(rng, m);
      bool dup = false;
      for (const auto& o : inputs)
        if (o.values() == q.values()) dup = true;
      if (!dup) inputs.push_back(std::move(q));
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(-2.0, 2.0);
    const PowexpSpec pe{1.0, 1.0, 0.5, 0.0};
    GPModel model;
    model.spec = pe;
    model.inputs = inputs;
    const Eigen::MatrixXd r = build_gram(KernelSpec(pe), inputs);
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    model.chol = llt.matrixL();
    model.alpha = llt.solve(y);
    model.free_params = {0, 1, 2};
    for (int i = 0; i < n; ++i) {
      const Prediction p = predict(model, inputs[i]);
      const double rel = std::abs(p.mean - y[i]) / (1.0 + std::abs(y[i]));
      interp_worst = std::max(interp_worst, rel);
      interp_ok = interp_ok && rel <= 1e-8 && p.variance <= 1e-8 * pe.sigma2;
    }
  }
  gate.check("AC-7 zero-nugget interpolation", interp_ok,
             fmt("worst relative mean error %.2e <= 1e-8", interp_worst));

  // Stationarity of the powexp kernel under common shifts.
  bool shift_ok = true;
  double shift_worst = 0.0;
  const PowexpSpec pe{1.3, 0.7, 0.8, 0.1};
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_quantiles(rng, m);
    const auto b = random_quantiles(rng, m);
    const double c = rng.uniform(-5.0, 5.0);
    const double base = powexp_kernel(pe, a, b);
    const double moved = powexp_kernel(pe, shift(a, c), shift(b, c));
    const double err = std::abs(base - moved) / (1.0 + std::abs(base));
    shift_worst = std::max(shift_worst, err);
    shift_ok = shift_ok && err <= 1e-12;
  }
  gate.check("AC-7 shift stationarity", shift_ok,
             fmt("worst relative deviation %.2e <= 1e-12", shift_worst));

  // Fractional Brownian increment identity on 100 random pairs.
  bool fbm_ok = true;
  double fbm_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double h = rng.uniform(0.1, 1.0);
    const FbmSpec spec{h, random_quantiles(rng, m)};
    const auto a = random_quantiles(rng, m);
    const auto b = random_quantiles(rng, m);
    const double lhs = fbm_kernel(spec, a, a) + fbm_kernel(spec, b, b) -
                       2.0 * fbm_kernel(spec, a, b);
    const double rhs = std::pow(w2_distance(a, b), 2.0 * h);
    const double err = std::abs(lhs - rhs) / (1.0 + rhs);
    fbm_worst = std::max(fbm_worst, err);
    fbm_ok = fbm_ok && err <= 1e-12;
  }
  gate.check("AC-7 fbm increment identity", fbm_ok,
             fmt("worst relative deviation %.2e <= 1e-12", fbm_worst));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(argv[i]);
  auto enabled = [&](const char* name) {
    return wanted.empty() || wanted.count(name) > 0;
  };

  Gate gate;
  BenchmarkReport table2;
  if (enabled("AC1")) ac1(gate);
  if (enabled("AC2")) ac2(gate, &table2);
  if (enabled("AC3")) ac3(gate);
  if (enabled("AC4")) ac4(gate);
  if (enabled("AC5")) ac5(gate);
  if (enabled("AC6")) ac6(gate);
  if (enabled("AC7")) ac7(gate);

  std::printf("acceptance summary: %d passed, %d failed\n", gate.passed,
              gate.failed);
  return gate.failed == 0 ? 0 : 1;
}
