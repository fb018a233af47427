#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wgp/gp.hpp"

using namespace wgp;

namespace {

QuantileFunction point_mass(double x, int m) {
  return QuantileFunction(Eigen::VectorXd::Constant(m, x));
}

QuantileFunction gaussian_quantiles(double mu, double sd, int m) {
  Eigen::VectorXd vals(m);
  for (int k = 0; k < m; ++k)
    vals[k] = mu + sd * normal_quantile(QuantileFunction::grid_point(k, m));
  return QuantileFunction(std::move(vals));
}

QuantileFunction random_quantiles(Rng& rng, int m) {
  EmpiricalDistribution e;
  const int atoms = 2 + static_cast<int>(rng.next_u64() % 5);
  for (int a = 0; a < atoms; ++a) e.samples.push_back(rng.uniform(-2.0, 2.0));
  return quantile_from_samples(e, m);
}

GridDensity bump_density(double center, double width, int d) {
  Eigen::VectorXd f(d);
  for (int j = 0; j < d; ++j) {
    const double x = static_cast<double>(j) / (d - 1);
    const double t = (x - center) / width;
    f[j] = std::exp(-0.5 * t * t);
  }
  return GridDensity::normalized(0.0, 1.0, std::move(f));
}

// Spread-out inputs in the spirit of the increasing-domain setting: the
// i-th input lives near i on the line.
std::vector<QuantileFunction> spread_inputs(Rng& rng, int n, int m) {
  std::vector<QuantileFunction> out;
  for (int i = 0; i < n; ++i)
    out.push_back(gaussian_quantiles(static_cast<double>(i) +
                                         rng.uniform(-0.2, 0.2),
                                     rng.uniform(0.05, 0.3), m));
  return out;
}

// Test-only model assembly (dense path, explicit jitter); doubles as an
// independent construction route for the prediction oracle.
GPModel make_model(const KernelSpec& spec,
                   const std::vector<QuantileFunction>& inputs,
                   const Eigen::VectorXd& y, double jitter_abs) {
  GPModel model;
  model.spec = spec;
  model.inputs = inputs;
  Eigen::MatrixXd r = build_gram(spec, inputs);
  r.diagonal().array() += jitter_abs;
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  REQUIRE(llt.info() == Eigen::Success);
  model.chol = llt.matrixL();
  model.alpha = llt.solve(y);
  const int n = static_cast<int>(inputs.size());
  model.loglik = (2.0 / n) * model.chol.diagonal().array().log().sum() +
                 y.dot(model.alpha) / n;
  model.jitter_used = jitter_abs;
  model.free_params = {0, 1, 2};
  return model;
}

Eigen::VectorXd draw_gp(const KernelSpec& spec,
                        const std::vector<QuantileFunction>& inputs,
                        std::uint64_t seed) {
  Eigen::MatrixXd r = build_gram(spec, inputs);
  r.diagonal().array() += 1e-12 * r.diagonal().mean();
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  REQUIRE(llt.info() == Eigen::Success);
  Rng rng(seed);
  Eigen::VectorXd xi(r.rows());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
  return Eigen::MatrixXd(llt.matrixL()) * xi;
}

}  // namespace

TEST_CASE("build_gram matches the naive double loop") {
  Rng rng(41);
  const int m = 32, n = 7;
  std::vector<QuantileFunction> inputs;
  for (int i = 0; i < n; ++i) inputs.push_back(random_quantiles(rng, m));

  const PowexpSpec pe{1.4, 0.8, 0.6, 0.2};
  const Eigen::MatrixXd k = build_gram(KernelSpec(pe), inputs);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(k(i, j) ==
            doctest::Approx(powexp_kernel(pe, inputs[i], inputs[j]))
                .epsilon(1e-12));

  const FbmSpec fb{0.4, point_mass(0.0, m)};
  const Eigen::MatrixXd kf = build_gram(KernelSpec(fb), inputs);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(kf(i, j) ==
            doctest::Approx(fbm_kernel(fb, inputs[i], inputs[j]))
                .epsilon(1e-12));
}

TEST_CASE("build_gram single input and permutation consistency") {
  const int m = 16;
  const PowexpSpec pe{2.0, 1.0, 0.5, 0.3};
  const std::vector<QuantileFunction> one = {point_mass(1.0, m)};
  const Eigen::MatrixXd k1 = build_gram(KernelSpec(pe), one);
  CHECK(k1.rows() == 1);
  CHECK(k1(0, 0) == 2.3);

  Rng rng(42);
  std::vector<QuantileFunction> inputs;
  for (int i = 0; i < 5; ++i) inputs.push_back(random_quantiles(rng, m));
  const Eigen::MatrixXd k = build_gram(KernelSpec(pe), inputs);
  std::vector<QuantileFunction> swapped = inputs;
  std::swap(swapped[1], swapped[3]);
  const Eigen::MatrixXd ks = build_gram(KernelSpec(pe), swapped);
  CHECK(ks(0, 1) == k(0, 3));
  CHECK(ks(1, 3) == k(3, 1));
  CHECK(ks(1, 1) == k(3, 3));
}

TEST_CASE("neg_log_lik scalar and identity cases") {
  const int m = 8;
  Dataset one;
  one.inputs = {point_mass(0.0, m)};
  one.targets = Eigen::VectorXd::Constant(1, 1.3);
  const PowexpSpec pe{2.0, 1.0, 0.5, 0.0};
  const NllResult r = neg_log_lik(KernelSpec(pe), one, 0.0);
  CHECK(r.value ==
        doctest::Approx(std::log(2.0) + 1.3 * 1.3 / 2.0).epsilon(1e-14));
  CHECK(r.jitter_used == 0.0);

  // Far-separated point masses with a short correlation length: the Gram
  // matrix underflows to the identity.
  Dataset far;
  for (int i = 0; i < 4; ++i)
    far.inputs.push_back(point_mass(1e4 * i, m));
  far.targets.resize(4);
  far.targets << 0.5, -1.0, 2.0, 0.25;
  const PowexpSpec unit{1.0, 1e-3, 0.5, 0.0};
  const NllResult ri = neg_log_lik(KernelSpec(unit), far, 0.0);
  CHECK(ri.value ==
        doctest::Approx(far.targets.squaredNorm() / 4.0).epsilon(1e-14));
}

TEST_CASE("neg_log_lik matches the dense determinant oracle") {
  Rng rng(43);
  const int m = 24;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);  // up to 5
    Dataset data;
    for (int i = 0; i < n; ++i) data.inputs.push_back(random_quantiles(rng, m));
    data.targets.resize(n);
    for (int i = 0; i < n; ++i) data.targets[i] = rng.normal();
    const PowexpSpec pe{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                        rng.uniform(0.3, 0.9), rng.uniform(0.01, 0.5)};
    const double value = neg_log_lik(KernelSpec(pe), data, 0.0).value;

    const Eigen::MatrixXd r = build_gram(KernelSpec(pe), data.inputs);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
    const double oracle = (std::log(lu.determinant()) +
                           data.targets.dot(lu.inverse() * data.targets)) /
                          n;
    CHECK(value == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(44);
  const int m = 24;
  int done = 0;
  while (done < 20) {
    const int n = 5 + static_cast<int>(rng.next_u64() % 4);
    Dataset data;
    const int family = done % 3;
    if (family == 2) {
      for (int i = 0; i < n; ++i)
        data.densities.push_back(bump_density(rng.uniform(0.3, 0.7),
                                              rng.uniform(0.08, 0.2), 60));
      for (const auto& g : data.densities)
        data.inputs.push_back(quantile_from_density(g, m));
    } else {
      for (int i = 0; i < n; ++i)
        data.inputs.push_back(random_quantiles(rng, m));
    }
    data.targets.resize(n);
    for (int i = 0; i < n; ++i) data.targets[i] = rng.normal();

    KernelSpec spec;
    if (family == 0) {
      spec = PowexpSpec{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                        rng.uniform(0.3, 0.9), rng.uniform(0.05, 0.5)};
    } else if (family == 1) {
      spec = FbmSpec{rng.uniform(0.3, 0.8), point_mass(0.0, m)};
    } else {
      LegendreSpec l;
      l.order = 3;
      l.sigma2 = rng.uniform(0.5, 2.0);
      l.ells = Eigen::VectorXd::Constant(3, 0.0);
      for (int q = 0; q < 3; ++q) l.ells[q] = rng.uniform(0.05, 0.5);
      l.h = rng.uniform(0.3, 0.9);
      spec = l;
    }

    const Eigen::VectorXd grad = neg_log_lik_grad(spec, data, 0.0);
    const Eigen::VectorXd theta = kernel_param_values(spec);
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      if (family == 0 && k == 3 && std::get<PowexpSpec>(spec).delta == 0.0)
        continue;
      const double h = 1e-5 * std::max(std::abs(theta[k]), 1e-3);
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fp =
          neg_log_lik(kernel_with_params(spec, tp), data, 0.0).value;
      const double fm =
          neg_log_lik(kernel_with_params(spec, tm), data, 0.0).value;
      const double fd = (fp - fm) / (2.0 * h);
      CHECK(std::abs(grad[k] - fd) <=
            1e-5 * std::max({std::abs(fd), std::abs(grad[k]), 1e-6}));
    }
    ++done;
  }
}

TEST_CASE("gradient in sigma2 matches the symbolic reduction") {
  // With R = sigma2 C and delta = 0:
  //   dL/dsigma2 = (1/n)(n/sigma2 - y'C^{-1}y / sigma2^2).
  Rng rng(45);
  const int m = 24, n = 6;
  Dataset data;
  for (int i = 0; i < n; ++i) data.inputs.push_back(random_quantiles(rng, m));
  data.targets.resize(n);
  for (int i = 0; i < n; ++i) data.targets[i] = rng.normal();
  const double sigma2 = 1.7;
  const PowexpSpec pe{sigma2, 1.1, 0.6, 0.0};
  const Eigen::VectorXd grad = neg_log_lik_grad(KernelSpec(pe), data, 0.0);

  PowexpSpec unit = pe;
  unit.sigma2 = 1.0;
  const Eigen::MatrixXd c = build_gram(KernelSpec(unit), data.inputs);
  const double quad = data.targets.dot(c.llt().solve(data.targets));
  const double expected = (n / sigma2 - quad / (sigma2 * sigma2)) / n;
  CHECK(grad[0] == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("prediction matches the dense-inverse oracle") {
  Rng rng(46);
  const int m = 24;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    std::vector<QuantileFunction> inputs;
    for (int i = 0; i < n; ++i) inputs.push_back(random_quantiles(rng, m));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    const PowexpSpec pe{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                        rng.uniform(0.3, 0.9), rng.uniform(0.01, 0.3)};
    const GPModel model = make_model(KernelSpec(pe), inputs, y, 0.0);

    const auto query = random_quantiles(rng, m);
    const Prediction got = predict(model, query);

    const Eigen::MatrixXd r = build_gram(KernelSpec(pe), inputs);
    const Eigen::MatrixXd rinv = r.inverse();
    Eigen::VectorXd rv(n);
    for (int i = 0; i < n; ++i) rv[i] = powexp_kernel(pe, query, inputs[i]);
    const double mean = rv.dot(rinv * y);
    const double variance = pe.sigma2 + pe.delta - rv.dot(rinv * rv);
    CHECK(got.mean == doctest::Approx(mean).epsilon(1e-10));
    CHECK(got.variance ==
          doctest::Approx(std::max(variance, 0.0)).epsilon(1e-8));
  }
}

TEST_CASE("zero-nugget models interpolate the training targets") {
  Rng rng(47);
  const int m = 32, n = 10;
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
  const GPModel model = make_model(KernelSpec(pe), inputs, y, 0.0);
  for (int i = 0; i < n; ++i) {
    const Prediction p = predict(model, inputs[i]);
    CHECK(p.mean == doctest::Approx(y[i]).epsilon(1e-8));
    CHECK(p.variance <= 1e-8 * pe.sigma2);
  }
}

TEST_CASE("far queries revert to the prior") {
  Rng rng(48);
  const int m = 16, n = 6;
  std::vector<QuantileFunction> inputs;
  for (int i = 0; i < n; ++i) inputs.push_back(random_quantiles(rng, m));
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  const PowexpSpec pe{1.5, 1.0, 0.5, 0.2};
  GPModel model = make_model(KernelSpec(pe), inputs, y, 0.0);
  model.target_offset = 0.75;

  const Prediction p = predict(model, point_mass(1e7, m));
  CHECK(std::abs(p.mean - model.target_offset) <= 1e-6);
  CHECK(p.variance == doctest::Approx(pe.sigma2 + pe.delta).epsilon(1e-6));
}

TEST_CASE("fit finds a near-global optimum of the likelihood") {
  const int m = 128, n = 60;
  Rng rng(49);
  Dataset data;
  data.inputs = spread_inputs(rng, n, m);
  const PowexpSpec truth{1.0, 1.0, 0.5, 0.05};
  data.targets = draw_gp(KernelSpec(truth), data.inputs, 4242);

  FitConfig cfg;
  cfg.nugget = FitConfig::Nugget::fit;
  cfg.center_targets = false;
  cfg.n_starts = 6;
  cfg.seed = 7;
  const GPModel model = fit_ml(data, KernelFamily::powexp, cfg);

  // First-order condition at the optimum (projected, transformed coords).
  CHECK(model.grad_norm <= 1e-4 * (1.0 + std::abs(model.loglik)));

  // The fitted value never exceeds the likelihood at the truth nor at a
  // cloud of random candidates.
  const double l_true = neg_log_lik(KernelSpec(truth), data, cfg.jitter).value;
  CHECK(model.loglik <= l_true + 1e-9);
  Rng cand(77);
  for (int t = 0; t < 50; ++t) {
    const PowexpSpec probe{std::exp(cand.uniform(-2.0, 2.0)),
                           std::exp(cand.uniform(-2.0, 2.0)),
                           cand.uniform(0.05, 1.0),
                           std::exp(cand.uniform(-6.0, 0.0))};
    CHECK(model.loglik <=
          neg_log_lik(KernelSpec(probe), data, cfg.jitter).value + 1e-9);
  }
}

TEST_CASE("fit with a known nugget recovers the remaining parameters") {
  // The (sigma2, ell, H) block is well identified once delta is pinned;
  // full four-parameter recovery at this scale is information-limited (the
  // acceptance suite reports it).
  const int m = 128, n = 60;
  Rng rng(49);
  Dataset data;
  data.inputs = spread_inputs(rng, n, m);
  const PowexpSpec truth{1.0, 1.0, 0.5, 0.05};
  data.targets = draw_gp(KernelSpec(truth), data.inputs, 4242);

  FitConfig cfg;
  cfg.nugget = FitConfig::Nugget::fixed;
  cfg.nugget_value = truth.delta;
  cfg.center_targets = false;
  cfg.n_starts = 6;
  cfg.seed = 7;
  const GPModel model = fit_ml(data, KernelFamily::powexp, cfg);
  const auto& pe = std::get<PowexpSpec>(model.spec);
  CHECK(pe.delta == truth.delta);
  CHECK(std::abs(std::log(pe.sigma2 / truth.sigma2)) <= 1.0);
  CHECK(std::abs(std::log(pe.ell / truth.ell)) <= 1.0);
}

TEST_CASE("constant targets drive sigma2 to its lower bound") {
  Rng rng(50);
  const int m = 32, n = 8;
  Dataset data;
  for (int i = 0; i < n; ++i) data.inputs.push_back(random_quantiles(rng, m));
  data.targets = Eigen::VectorXd::Zero(n);
  FitConfig cfg;
  cfg.n_starts = 3;
  cfg.seed = 5;
  const GPModel model = fit_ml(data, KernelFamily::powexp, cfg);
  const auto& pe = std::get<PowexpSpec>(model.spec);
  // Box floor is 1e-6 * max(var(y), 1e-12) = 1e-18.
  CHECK(pe.sigma2 <= 1e-17);
}

TEST_CASE("more starts never increase the attained minimum") {
  Rng rng(51);
  const int m = 64, n = 24;
  Dataset data;
  data.inputs = spread_inputs(rng, n, m);
  data.targets = draw_gp(KernelSpec(PowexpSpec{1.0, 1.0, 0.5, 0.1}),
                         data.inputs, 99);
  FitConfig small;
  small.n_starts = 3;
  small.seed = 21;
  small.nugget = FitConfig::Nugget::fit;
  FitConfig large = small;
  large.n_starts = 6;
  const GPModel a = fit_ml(data, KernelFamily::powexp, small);
  const GPModel b = fit_ml(data, KernelFamily::powexp, large);
  CHECK(b.loglik <= a.loglik + 1e-12);
}

TEST_CASE("fbm fitting works through the simplex path") {
  const int m = 64, n = 24;
  Rng rng(52);
  std::vector<QuantileFunction> inputs = spread_inputs(rng, n, m);
  const FbmSpec truth{0.4, point_mass(0.0, m)};
  Dataset data;
  data.inputs = inputs;
  data.targets = draw_gp(KernelSpec(truth), inputs, 31);
  FitConfig cfg;
  cfg.n_starts = 4;
  cfg.seed = 3;
  cfg.center_targets = false;
  const GPModel model = fit_ml(data, KernelFamily::fbm, cfg);
  const auto& fb = std::get<FbmSpec>(model.spec);
  CHECK(fb.h > 0.01);
  CHECK(fb.h < 0.99);
  CHECK(std::abs(fb.h - truth.h) <= 0.25);
}

TEST_CASE("info matrix p=1 symbolic case") {
  Rng rng(53);
  const int m = 24, n = 7;
  std::vector<QuantileFunction> inputs;
  for (int i = 0; i < n; ++i) inputs.push_back(random_quantiles(rng, m));
  const double sigma2 = 1.7;
  const KernelSpec spec = PowexpSpec{sigma2, 0.9, 0.6, 0.0};
  const InfoMatrix info = info_matrix_for(spec, inputs, {}, {0}, 0.0);
  CHECK(info.m(0, 0) ==
        doctest::Approx(1.0 / (2.0 * sigma2 * sigma2)).epsilon(1e-10));
  CHECK(info.param_names[0] == "sigma2");
}

TEST_CASE("info matrix is symmetric positive semidefinite") {
  Rng rng(54);
  const int m = 48, n = 20;
  std::vector<QuantileFunction> inputs = spread_inputs(rng, n, m);
  const KernelSpec spec = PowexpSpec{1.2, 0.8, 0.5, 0.07};
  const InfoMatrix info =
      info_matrix_for(spec, inputs, {}, {0, 1, 2, 3}, 1e-10);
  CHECK((info.m - info.m.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(info.eigenvalues(0) >= -1e-8 * info.m.trace());
}

TEST_CASE("info matrix matches the expected Hessian over draws") {
  // E[d^2 L / dtheta_i dtheta_j] = 2 M at the true parameters; checked by
  // Monte Carlo over simulated target vectors with a finite-difference
  // Hessian of L in (sigma2, ell).
  const int m = 48, n = 16;
  Rng rng(55);
  std::vector<QuantileFunction> inputs = spread_inputs(rng, n, m);
  const PowexpSpec theta0{1.0, 1.0, 0.5, 0.1};
  const InfoMatrix info =
      info_matrix_for(KernelSpec(theta0), inputs, {}, {0, 1}, 0.0);

  Dataset data;
  data.inputs = inputs;
  const Eigen::VectorXd theta = kernel_param_values(KernelSpec(theta0));
  const double h = 1e-4;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int reps = 300;
  for (int rep = 0; rep < reps; ++rep) {
    data.targets = draw_gp(KernelSpec(theta0), inputs, 1000 + rep);
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        Eigen::VectorXd tpp = theta, tpm = theta, tmp = theta, tmm = theta;
        tpp[a] += h; tpp[b] += h;
        tpm[a] += h; tpm[b] -= h;
        tmp[a] -= h; tmp[b] += h;
        tmm[a] -= h; tmm[b] -= h;
        const auto eval = [&](const Eigen::VectorXd& t) {
          return neg_log_lik(kernel_with_params(KernelSpec(theta0), t), data,
                             0.0).value;
        };
        const double hess =
            (eval(tpp) - eval(tpm) - eval(tmp) + eval(tmm)) / (4.0 * h * h);
        acc(a, b) += hess;
        acc(b, a) = acc(a, b);
      }
  }
  acc /= reps;
  const Eigen::Matrix2d expected = 2.0 * info.m;
  const double scale = expected.norm();
  CHECK((acc - expected).norm() <= 0.10 * scale);
}

TEST_CASE("rmse and cir basics") {
  const std::vector<double> zeros = {1.0, 2.0, 3.0};
  CHECK(rmse(zeros, zeros) == 0.0);
  const std::vector<double> sds = {1.0, 1.0, 1.0};
  CHECK(cir(zeros, sds, zeros, 0.9) == 1.0);

  const std::vector<double> preds = {3.0, 4.0};
  const std::vector<double> truths = {0.0, 0.0};
  CHECK(rmse(preds, truths) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));

  // Errors exactly at q_alpha * sd count as covered.
  const double q = normal_quantile(0.95);
  const std::vector<double> p2 = {q, -q};
  const std::vector<double> t2 = {0.0, 0.0};
  const std::vector<double> s2 = {1.0, 1.0};
  CHECK(cir(p2, s2, t2, 0.9) == 1.0);

  const std::vector<double> shorter = {1.0};
  CHECK_THROWS_AS(rmse(shorter, truths), invalid_input);
  CHECK_THROWS_AS(cir(p2, s2, t2, 1.5), invalid_input);
}

TEST_CASE("jitter escalation on a singular covariance is recorded") {
  // Two exactly equal inputs with no nugget give an exactly singular Gram
  // matrix: the zero-jitter attempt is rejected and the ladder kicks in,
  // which is observable through the recorded jitter.
  const int m = 16;
  Dataset data;
  data.inputs = {point_mass(1.0, m), point_mass(1.0, m)};
  data.targets.resize(2);
  data.targets << 1.0, 1.0;
  const PowexpSpec pe{1.0, 1.0, 0.5, 0.0};
  const NllResult r = neg_log_lik(KernelSpec(pe), data, 0.0);
  CHECK(r.jitter_used > 0.0);

  // Well-conditioned input needs no escalation.
  Dataset good;
  good.inputs = {point_mass(0.0, m), point_mass(2.0, m)};
  good.targets.resize(2);
  good.targets << 1.0, -1.0;
  CHECK(neg_log_lik(KernelSpec(pe), good, 0.0).jitter_used == 0.0);
}

TEST_CASE("dataset validation") {
  Dataset data;
  CHECK_THROWS_AS(data.validate(), invalid_input);
  data.inputs = {point_mass(0.0, 8)};
  data.targets = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(data.validate(), invalid_input);
  data.targets = Eigen::VectorXd::Zero(1);
  data.validate();
  CHECK_THROWS_AS(data.validate(true), invalid_input);  // n >= 2 for fitting
  data.inputs.push_back(point_mass(0.0, 16));           // grid mismatch
  data.targets = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(data.validate(), invalid_input);
}
