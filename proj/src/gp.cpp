#include "wgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "wgp/optim.hpp"

namespace wgp {

void Dataset::validate(bool for_fit) const {
  const std::size_t n = inputs.size();
  if (n == 0) throw invalid_input("dataset has no inputs");
  if (static_cast<std::size_t>(targets.size()) != n)
    throw invalid_input("dataset: inputs and targets lengths disagree");
  if (!meta.empty() && meta.size() != n)
    throw invalid_input("dataset: meta length disagrees with inputs");
  if (!densities.empty() && densities.size() != n)
    throw invalid_input("dataset: densities length disagrees with inputs");
  if (!targets.allFinite()) throw invalid_input("dataset: targets must be finite");
  const int m = inputs[0].grid_size();
  for (const auto& q : inputs)
    if (q.grid_size() != m)
      throw invalid_input("dataset: inputs must share one quantile grid");
  if (for_fit && n < 2) throw invalid_input("fitting needs at least 2 inputs");
}

// ---------------------------------------------------------------------------
// Canonical parameter vectors
// ---------------------------------------------------------------------------

std::vector<std::string> kernel_param_names(const KernelSpec& spec) {
  switch (family_of(spec)) {
    case KernelFamily::powexp:
      return {"sigma2", "ell", "h", "delta"};
    case KernelFamily::fbm:
      return {"h"};
    case KernelFamily::legendre:
    case KernelFamily::pca: {
      const int o = std::holds_alternative<LegendreSpec>(spec)
                        ? std::get<LegendreSpec>(spec).order
                        : std::get<PcaSpec>(spec).order();
      std::vector<std::string> names = {"sigma2"};
      for (int i = 0; i < o; ++i) names.push_back("ell_" + std::to_string(i));
      names.push_back("h");
      return names;
    }
  }
  return {};
}

Eigen::VectorXd kernel_param_values(const KernelSpec& spec) {
  if (const auto* p = std::get_if<PowexpSpec>(&spec)) {
    Eigen::VectorXd v(4);
    v << p->sigma2, p->ell, p->h, p->delta;
    return v;
  }
  if (const auto* f = std::get_if<FbmSpec>(&spec)) {
    Eigen::VectorXd v(1);
    v << f->h;
    return v;
  }
  if (const auto* l = std::get_if<LegendreSpec>(&spec)) {
    Eigen::VectorXd v(l->order + 2);
    v[0] = l->sigma2;
    v.segment(1, l->order) = l->ells;
    v[l->order + 1] = l->h;
    return v;
  }
  const auto& c = std::get<PcaSpec>(spec);
  Eigen::VectorXd v(c.order() + 2);
  v[0] = c.sigma2;
  v.segment(1, c.order()) = c.ells;
  v[c.order() + 1] = c.h;
  return v;
}

KernelSpec kernel_with_params(const KernelSpec& spec, const Eigen::VectorXd& p) {
  KernelSpec out = spec;
  const Eigen::Index expected = kernel_param_values(spec).size();
  if (p.size() != expected)
    throw invalid_input("kernel_with_params: wrong parameter count");
  if (auto* pe = std::get_if<PowexpSpec>(&out)) {
    pe->sigma2 = p[0];
    pe->ell = p[1];
    pe->h = p[2];
    pe->delta = p[3];
  } else if (auto* f = std::get_if<FbmSpec>(&out)) {
    f->h = p[0];
  } else if (auto* l = std::get_if<LegendreSpec>(&out)) {
    l->sigma2 = p[0];
    l->ells = p.segment(1, l->order);
    l->h = p[l->order + 1];
  } else {
    auto& c = std::get<PcaSpec>(out);
    c.sigma2 = p[0];
    c.ells = p.segment(1, c.order());
    c.h = p[c.order() + 1];
  }
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------
// Distance / feature caches
// ---------------------------------------------------------------------------

namespace {

struct KernelCache {
  KernelFamily family = KernelFamily::powexp;
  int n = 0;
  Eigen::MatrixXd w2;                      // powexp, fbm
  Eigen::VectorXd w0;                      // fbm
  std::vector<Eigen::MatrixXd> coord_ad;   // projection, one matrix per score
};

Eigen::MatrixXd pairwise_w2(const std::vector<QuantileFunction>& inputs,
                            int threads) {
  const int n = static_cast<int>(inputs.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < static_cast<std::size_t>(n); ++j)
      w(i, j) = w2_distance(inputs[i], inputs[j]);
  });
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) w(i, j) = w(j, i);
  return w;
}

KernelCache build_cache(const KernelSpec& spec,
                        const std::vector<QuantileFunction>& inputs,
                        int threads) {
  KernelCache cache;
  cache.family = family_of(spec);
  cache.n = static_cast<int>(inputs.size());
  if (is_projection(cache.family))
    throw invalid_input("projection kernels operate on features, not quantiles");
  cache.w2 = pairwise_w2(inputs, threads);
  if (cache.family == KernelFamily::fbm) {
    const auto& origin = std::get<FbmSpec>(spec).origin;
    cache.w0.resize(cache.n);
    for (int i = 0; i < cache.n; ++i) cache.w0[i] = w2_distance(origin, inputs[i]);
  }
  return cache;
}

KernelCache build_cache(const KernelSpec& spec,
                        const std::vector<FeatureVector>& features) {
  KernelCache cache;
  cache.family = family_of(spec);
  cache.n = static_cast<int>(features.size());
  if (!is_projection(cache.family))
    throw invalid_input("W2 kernels operate on quantile functions, not features");
  if (cache.n == 0) throw invalid_input("no features");
  const Eigen::Index o = features[0].coeffs.size();
  for (const auto& f : features)
    if (f.coeffs.size() != o) throw invalid_input("feature lengths differ");
  cache.coord_ad.assign(o, Eigen::MatrixXd::Zero(cache.n, cache.n));
  for (int i = 0; i < cache.n; ++i)
    for (int j = i + 1; j < cache.n; ++j) {
      for (Eigen::Index k = 0; k < o; ++k) {
        const double d = std::abs(features[i].coeffs[k] - features[j].coeffs[k]);
        cache.coord_ad[k](i, j) = d;
        cache.coord_ad[k](j, i) = d;
      }
    }
  return cache;
}

Eigen::MatrixXd gram_from_cache(const KernelSpec& spec, const KernelCache& cache) {
  validate(spec);
  const int n = cache.n;
  Eigen::MatrixXd k(n, n);
  if (const auto* p = std::get_if<PowexpSpec>(&spec)) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double w = cache.w2(i, j);
        k(i, j) = k(j, i) = powexp_eval(*p, w, w == 0.0);
      }
  } else if (const auto* f = std::get_if<FbmSpec>(&spec)) {
    const double e = 2.0 * f->h;
    Eigen::VectorXd w0e(n);
    for (int i = 0; i < n; ++i) w0e[i] = std::pow(cache.w0[i], e);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        k(i, j) = k(j, i) =
            0.5 * (w0e[i] + w0e[j] - std::pow(cache.w2(i, j), e));
  } else {
    double sigma2, h;
    const Eigen::VectorXd* ells;
    if (const auto* l = std::get_if<LegendreSpec>(&spec)) {
      sigma2 = l->sigma2;
      h = l->h;
      ells = &l->ells;
    } else {
      const auto& c = std::get<PcaSpec>(spec);
      sigma2 = c.sigma2;
      h = c.h;
      ells = &c.ells;
    }
    if (static_cast<std::size_t>(ells->size()) != cache.coord_ad.size())
      throw invalid_input("spec order does not match cached feature count");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < cache.coord_ad.size(); ++q)
      s += cache.coord_ad[q] / (*ells)[q];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        k(i, j) = k(j, i) = sigma2 * std::exp(-std::pow(s(i, j), h));
  }
  if (!k.allFinite()) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        if (!std::isfinite(k(i, j)))
          throw numeric_error("non-finite kernel value at pair (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
  }
  return k;
}

// d/dh of w^{2h} is 2 ln(w) w^{2h}; the w = 0 limit is 0 for h > 0.
double dpow2h_dh(double w, double h) {
  if (w <= 0.0) return 0.0;
  return 2.0 * std::log(w) * std::pow(w, 2.0 * h);
}

std::vector<Eigen::MatrixXd> derivs_from_cache(const KernelSpec& spec,
                                               const KernelCache& cache) {
  validate(spec);
  const int n = cache.n;
  std::vector<Eigen::MatrixXd> out;
  if (const auto* p = std::get_if<PowexpSpec>(&spec)) {
    Eigen::MatrixXd dsig(n, n), dell(n, n), dh(n, n), ddel(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double w = cache.w2(i, j);
        const double pw = std::pow(w, 2.0 * p->h);
        const double e = std::exp(-pw / p->ell);
        dsig(i, j) = dsig(j, i) = e;
        dell(i, j) = dell(j, i) = p->sigma2 * e * pw / (p->ell * p->ell);
        dh(i, j) = dh(j, i) = -p->sigma2 * e * dpow2h_dh(w, p->h) / p->ell;
        ddel(i, j) = ddel(j, i) = (w == 0.0) ? 1.0 : 0.0;
      }
    out = {dsig, dell, dh, ddel};
  } else if (const auto* f = std::get_if<FbmSpec>(&spec)) {
    Eigen::MatrixXd dh(n, n);
    Eigen::VectorXd d0(n);
    for (int i = 0; i < n; ++i) d0[i] = dpow2h_dh(cache.w0[i], f->h);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        dh(i, j) = dh(j, i) =
            0.5 * (d0[i] + d0[j] - dpow2h_dh(cache.w2(i, j), f->h));
    out = {dh};
  } else {
    double sigma2, h;
    const Eigen::VectorXd* ells;
    if (const auto* l = std::get_if<LegendreSpec>(&spec)) {
      sigma2 = l->sigma2;
      h = l->h;
      ells = &l->ells;
    } else {
      const auto& c = std::get<PcaSpec>(spec);
      sigma2 = c.sigma2;
      h = c.h;
      ells = &c.ells;
    }
    const int o = static_cast<int>(ells->size());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < o; ++q) s += cache.coord_ad[q] / (*ells)[q];

    Eigen::MatrixXd dsig(n, n), dh(n, n), sh1(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double sv = s(i, j);
        const double e = std::exp(-std::pow(sv, h));
        dsig(i, j) = dsig(j, i) = e;
        dh(i, j) = dh(j, i) =
            (sv > 0.0) ? -sigma2 * e * std::pow(sv, h) * std::log(sv) : 0.0;
        sh1(i, j) = sh1(j, i) = (sv > 0.0) ? sigma2 * e * h * std::pow(sv, h - 1.0) : 0.0;
      }
    out.push_back(dsig);
    for (int q = 0; q < o; ++q) {
      const double lq = (*ells)[q];
      out.push_back((sh1.array() * cache.coord_ad[q].array() / (lq * lq)).matrix());
    }
    out.push_back(dh);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cholesky with escalating jitter
// ---------------------------------------------------------------------------

struct CholOutcome {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

CholOutcome chol_with_jitter(const Eigen::MatrixXd& r, double jitter_rel) {
  const double mean_diag = r.diagonal().mean();
  double base = jitter_rel * mean_diag;
  std::vector<double> attempts;
  if (jitter_rel <= 0.0) {
    attempts = {0.0};
    base = 1e-10 * std::max(mean_diag, 1e-300);
    attempts.push_back(base);
    attempts.push_back(10.0 * base);
    attempts.push_back(100.0 * base);
  } else {
    attempts = {base, 10.0 * base, 100.0 * base, 1000.0 * base};
  }
  for (double jit : attempts) {
    Eigen::MatrixXd rj = r;
    if (jit > 0.0) rj.diagonal().array() += jit;
    Eigen::LLT<Eigen::MatrixXd> llt(rj);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      if ((lower.diagonal().array() > 0.0).all())
        return {std::move(lower), jit};
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  const double lam = eig.info() == Eigen::Success
                         ? eig.eigenvalues()(0)
                         : std::numeric_limits<double>::quiet_NaN();
  throw numeric_error(
      "covariance matrix is not positive definite after jitter escalation "
      "(smallest eigenvalue " + std::to_string(lam) + ")");
}

double nll_from_chol(const Eigen::MatrixXd& lower, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const Eigen::VectorXd z = lower.triangularView<Eigen::Lower>().solve(y);
  return (2.0 / n) * lower.diagonal().array().log().sum() +
         z.squaredNorm() / n;
}

std::vector<FeatureVector> dataset_features(const Dataset& data,
                                            const KernelSpec& spec) {
  if (data.densities.empty())
    throw invalid_input("projection kernels need the dataset densities");
  std::vector<FeatureVector> feats;
  feats.reserve(data.densities.size());
  if (const auto* l = std::get_if<LegendreSpec>(&spec)) {
    for (const auto& g : data.densities)
      feats.push_back(legendre_features(g, l->order));
  } else {
    const auto& basis = std::get<PcaSpec>(spec).basis;
    for (const auto& g : data.densities)
      feats.push_back(pca_features(g, basis));
  }
  return feats;
}

KernelCache cache_for(const KernelSpec& spec, const Dataset& data,
                      int threads) {
  if (is_projection(family_of(spec)))
    return build_cache(spec, dataset_features(data, spec));
  return build_cache(spec, data.inputs, threads);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public gram / likelihood operations
// ---------------------------------------------------------------------------

Eigen::MatrixXd build_gram(const KernelSpec& spec,
                           const std::vector<QuantileFunction>& inputs,
                           int threads) {
  if (inputs.empty()) throw invalid_input("build_gram: no inputs");
  return gram_from_cache(spec, build_cache(spec, inputs, threads));
}

Eigen::MatrixXd build_gram(const KernelSpec& spec,
                           const std::vector<FeatureVector>& features) {
  return gram_from_cache(spec, build_cache(spec, features));
}

std::vector<Eigen::MatrixXd> gram_derivatives(
    const KernelSpec& spec, const std::vector<QuantileFunction>& inputs,
    int threads) {
  if (inputs.empty()) throw invalid_input("gram_derivatives: no inputs");
  return derivs_from_cache(spec, build_cache(spec, inputs, threads));
}

std::vector<Eigen::MatrixXd> gram_derivatives(
    const KernelSpec& spec, const std::vector<FeatureVector>& features) {
  return derivs_from_cache(spec, build_cache(spec, features));
}

NllResult neg_log_lik(const KernelSpec& spec, const Dataset& data,
                      double jitter) {
  data.validate();
  const Eigen::MatrixXd r = gram_from_cache(spec, cache_for(spec, data, 1));
  const CholOutcome chol = chol_with_jitter(r, jitter);
  return {nll_from_chol(chol.lower, data.targets), chol.jitter};
}

Eigen::VectorXd neg_log_lik_grad(const KernelSpec& spec, const Dataset& data,
                                 double jitter) {
  data.validate();
  const KernelCache cache = cache_for(spec, data, 1);
  const Eigen::MatrixXd r = gram_from_cache(spec, cache);
  const CholOutcome chol = chol_with_jitter(r, jitter);
  const auto derivs = derivs_from_cache(spec, cache);

  const int n = data.size();
  const Eigen::MatrixXd rinv = chol.lower.triangularView<Eigen::Lower>()
                                   .transpose()
                                   .solve(Eigen::MatrixXd(
                                       chol.lower.triangularView<Eigen::Lower>()
                                           .solve(Eigen::MatrixXd::Identity(n, n))));
  Eigen::VectorXd alpha =
      chol.lower.triangularView<Eigen::Lower>().transpose().solve(
          Eigen::VectorXd(chol.lower.triangularView<Eigen::Lower>().solve(
              data.targets)));

  Eigen::VectorXd grad(derivs.size());
  for (std::size_t i = 0; i < derivs.size(); ++i) {
    const double tr = rinv.cwiseProduct(derivs[i]).sum();
    const double quad = alpha.dot(derivs[i] * alpha);
    grad[i] = (tr - quad) / n;
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Parameter transforms and fit
// ---------------------------------------------------------------------------

namespace {

enum class Transform { log_scale, logit_scale };

struct ParamSpace {
  std::vector<int> idx;                // canonical indices of free params
  std::vector<Transform> transforms;
  BoxBounds raw_box;                   // bounds in raw coordinates
  BoxBounds z_box;                     // bounds in transformed coordinates

  int dim() const { return static_cast<int>(idx.size()); }

  double to_z(double x, int k) const {
    if (transforms[k] == Transform::log_scale) return std::log(x);
    const double lo = raw_box.lo[k], hi = raw_box.hi[k];
    const double u = std::clamp((x - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
    return std::log(u / (1.0 - u));
  }
  double from_z(double z, int k) const {
    if (transforms[k] == Transform::log_scale) return std::exp(z);
    const double lo = raw_box.lo[k], hi = raw_box.hi[k];
    const double u = 1.0 / (1.0 + std::exp(-z));
    return lo + (hi - lo) * u;
  }
  // dx/dz for the chain rule.
  double dxdz(double x, int k) const {
    if (transforms[k] == Transform::log_scale) return x;
    const double lo = raw_box.lo[k], hi = raw_box.hi[k];
    return (x - lo) * (hi - lo == 0.0 ? 0.0 : (hi - x)) / (hi - lo);
  }

  Eigen::VectorXd vec_to_z(const Eigen::VectorXd& x) const {
    Eigen::VectorXd z(dim());
    for (int k = 0; k < dim(); ++k) z[k] = to_z(x[k], k);
    return z;
  }
  Eigen::VectorXd vec_from_z(const Eigen::VectorXd& z) const {
    Eigen::VectorXd x(dim());
    for (int k = 0; k < dim(); ++k) x[k] = from_z(z[k], k);
    return x;
  }
};

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_offdiag(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  v.reserve(m.rows() * (m.rows() - 1) / 2);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j) v.push_back(m(i, j));
  return median_of(std::move(v));
}

constexpr double kHMin = 0.01;

ParamSpace make_param_space(KernelFamily family, const KernelCache& cache,
                            double var_y, const FitConfig& cfg) {
  ParamSpace ps;
  const double vfloor = std::max(var_y, 1e-12);
  std::vector<double> lo, hi;

  auto add = [&](int canonical_idx, Transform t, double l, double h) {
    ps.idx.push_back(canonical_idx);
    ps.transforms.push_back(t);
    lo.push_back(l);
    hi.push_back(h);
  };

  const ParamBounds sig = cfg.sigma2_bounds.value_or(
      ParamBounds{1e-6 * vfloor, 1e4 * vfloor});
  const double h_hi = 1.0;
  const double h_hi_fbm = 0.99;

  if (family == KernelFamily::powexp) {
    ParamBounds ell;
    if (cfg.ell_bounds) {
      ell = *cfg.ell_bounds;
    } else {
      // The ell box must cover the scale w^{2H} for every H in the box, so
      // span both endpoints of the H range around the median distance.
      double mw = median_offdiag(cache.w2);
      if (!(mw > 0.0)) mw = 1.0;
      const double a = std::pow(mw, 2.0 * kHMin);
      const double b = std::pow(mw, 2.0);
      ell = {1e-3 * std::min(a, b), 1e3 * std::max(a, b)};
    }
    const ParamBounds hb = cfg.h_bounds.value_or(ParamBounds{kHMin, h_hi});
    add(0, Transform::log_scale, sig.lo, sig.hi);
    add(1, Transform::log_scale, ell.lo, ell.hi);
    add(2, Transform::logit_scale, hb.lo, hb.hi);
    if (cfg.nugget == FitConfig::Nugget::fit) {
      const ParamBounds db = cfg.delta_bounds.value_or(
          ParamBounds{1e-10 * vfloor, 10.0 * vfloor});
      add(3, Transform::log_scale, db.lo, db.hi);
    }
  } else if (family == KernelFamily::fbm) {
    const ParamBounds hb = cfg.h_bounds.value_or(ParamBounds{kHMin, h_hi_fbm});
    add(0, Transform::logit_scale, hb.lo, hb.hi);
  } else {
    const int o = static_cast<int>(cache.coord_ad.size());
    add(0, Transform::log_scale, sig.lo, sig.hi);
    // Per-coordinate scales from the median score separation; coordinates
    // with no variation inherit the largest informative scale.
    std::vector<double> med(o);
    double fallback = 0.0;
    for (int q = 0; q < o; ++q) {
      med[q] = median_offdiag(cache.coord_ad[q]);
      fallback = std::max(fallback, med[q]);
    }
    if (!(fallback > 0.0)) fallback = 1.0;
    for (int q = 0; q < o; ++q) {
      const double scale = med[q] > 0.0 ? med[q] : fallback;
      const ParamBounds fb = cfg.feature_ell_bounds.value_or(
          ParamBounds{1e-3 * scale, 1e3 * scale});
      add(1 + q, Transform::log_scale, fb.lo, fb.hi);
    }
    const ParamBounds hb = cfg.h_bounds.value_or(ParamBounds{kHMin, h_hi});
    add(1 + o, Transform::logit_scale, hb.lo, hb.hi);
  }

  ps.raw_box.lo = Eigen::Map<Eigen::VectorXd>(lo.data(), lo.size());
  ps.raw_box.hi = Eigen::Map<Eigen::VectorXd>(hi.data(), hi.size());
  ps.raw_box.validate();

  ps.z_box.lo.resize(ps.dim());
  ps.z_box.hi.resize(ps.dim());
  for (int k = 0; k < ps.dim(); ++k) {
    if (ps.transforms[k] == Transform::log_scale) {
      ps.z_box.lo[k] = std::log(ps.raw_box.lo[k]);
      ps.z_box.hi[k] = std::log(ps.raw_box.hi[k]);
    } else {
      // Logit already confines the raw value; clamp z for numeric sanity.
      ps.z_box.lo[k] = -18.0;
      ps.z_box.hi[k] = 18.0;
    }
  }
  return ps;
}

KernelSpec default_spec(KernelFamily family, const Dataset& data,
                        const FitConfig& cfg) {
  switch (family) {
    case KernelFamily::powexp: {
      PowexpSpec p;
      if (cfg.nugget == FitConfig::Nugget::fixed) p.delta = cfg.nugget_value;
      return p;
    }
    case KernelFamily::fbm: {
      if (cfg.nugget != FitConfig::Nugget::off)
        throw invalid_input("nugget is only available for the powexp kernel");
      FbmSpec f{0.5, cfg.fbm_origin.value_or(QuantileFunction(
                         Eigen::VectorXd::Zero(data.inputs[0].grid_size())))};
      return f;
    }
    case KernelFamily::legendre: {
      if (cfg.nugget != FitConfig::Nugget::off)
        throw invalid_input("nugget is only available for the powexp kernel");
      LegendreSpec l;
      l.order = cfg.order;
      l.ells = Eigen::VectorXd::Ones(cfg.order);
      return l;
    }
    case KernelFamily::pca: {
      if (cfg.nugget != FitConfig::Nugget::off)
        throw invalid_input("nugget is only available for the powexp kernel");
      if (data.densities.empty())
        throw invalid_input("pca fitting needs dataset densities");
      PcaSpec c;
      c.basis = pca_fit(data.densities, cfg.order, cfg.pca_centered_projection);
      c.ells = Eigen::VectorXd::Ones(cfg.order);
      return c;
    }
  }
  throw invalid_input("unknown kernel family");
}

}  // namespace

Eigen::VectorXd to_transformed_coords(const KernelSpec& spec,
                                      const std::vector<int>& param_idx) {
  const Eigen::VectorXd raw = kernel_param_values(spec);
  const auto names = kernel_param_names(spec);
  Eigen::VectorXd z(param_idx.size());
  for (std::size_t k = 0; k < param_idx.size(); ++k) {
    const int i = param_idx[k];
    if (i < 0 || i >= static_cast<int>(names.size()))
      throw invalid_input("parameter index out of range");
    if (names[i] == "h") {
      const double lo = kHMin, hi = 1.0;
      const double u = std::clamp((raw[i] - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
      z[k] = std::log(u / (1.0 - u));
    } else {
      if (!(raw[i] > 0.0))
        throw invalid_input("log coordinate of a non-positive parameter");
      z[k] = std::log(raw[i]);
    }
  }
  return z;
}

GPModel fit_ml(const Dataset& data, KernelFamily family, const FitConfig& cfg) {
  data.validate(/*for_fit=*/true);
  if (cfg.n_starts < 1) throw invalid_input("n_starts must be at least 1");
  if (cfg.max_evals < 10) throw invalid_input("max_evals must be at least 10");

  const int n = data.size();
  const double offset =
      cfg.center_targets ? data.targets.mean() : 0.0;
  const Eigen::VectorXd y = data.targets.array() - offset;
  const double var_y = y.squaredNorm() / n;

  KernelSpec spec0 = default_spec(family, data, cfg);
  std::vector<FeatureVector> features;
  KernelCache cache;
  if (is_projection(family)) {
    features = dataset_features(data, spec0);
    cache = build_cache(spec0, features);
  } else {
    cache = build_cache(spec0, data.inputs, cfg.threads);
  }

  const ParamSpace ps = make_param_space(family, cache, var_y, cfg);
  Eigen::VectorXd canonical = kernel_param_values(spec0);

  // L in transformed coordinates; non-finite signals a failed factorization
  // so the optimizer treats the region as a barrier.
  auto eval = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) -> double {
    Eigen::VectorXd params = canonical;
    const Eigen::VectorXd x = ps.vec_from_z(z);
    for (int k = 0; k < ps.dim(); ++k) params[ps.idx[k]] = x[k];
    KernelSpec spec = kernel_with_params(spec0, params);
    Eigen::MatrixXd r;
    try {
      r = gram_from_cache(spec, cache);
    } catch (const numeric_error&) {
      if (grad) grad->setZero();
      return std::numeric_limits<double>::infinity();
    }
    CholOutcome chol;
    try {
      chol = chol_with_jitter(r, cfg.jitter);
    } catch (const numeric_error&) {
      if (grad) grad->setZero();
      return std::numeric_limits<double>::infinity();
    }
    const double value = nll_from_chol(chol.lower, y);
    if (grad) {
      const auto derivs = derivs_from_cache(spec, cache);
      const Eigen::MatrixXd rinv =
          chol.lower.triangularView<Eigen::Lower>().transpose().solve(
              Eigen::MatrixXd(chol.lower.triangularView<Eigen::Lower>().solve(
                  Eigen::MatrixXd::Identity(n, n))));
      const Eigen::VectorXd alpha =
          chol.lower.triangularView<Eigen::Lower>().transpose().solve(
              Eigen::VectorXd(
                  chol.lower.triangularView<Eigen::Lower>().solve(y)));
      grad->resize(ps.dim());
      for (int k = 0; k < ps.dim(); ++k) {
        const Eigen::MatrixXd& dr = derivs[ps.idx[k]];
        const double draw = (rinv.cwiseProduct(dr).sum() - alpha.dot(dr * alpha)) / n;
        (*grad)[k] = draw * ps.dxdz(x[k], k);
      }
    }
    return value;
  };

  // Prefix-stable space-filling starts so a larger budget only adds
  // candidates (the attained minimum is monotone in n_starts).
  HaltonSequence halton(ps.dim(), cfg.seed);
  std::vector<Eigen::VectorXd> starts;
  for (int s = 0; s < cfg.n_starts; ++s) {
    const Eigen::VectorXd u = halton.next();
    Eigen::VectorXd z(ps.dim());
    for (int k = 0; k < ps.dim(); ++k)
      z[k] = ps.z_box.lo[k] + u[k] * (ps.z_box.hi[k] - ps.z_box.lo[k]);
    starts.push_back(std::move(z));
  }

  struct StartOutcome {
    double f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd z;
    double grad_norm = 0.0;
  };
  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t s) {
    if (family == KernelFamily::fbm) {
      auto plain = [&](const Eigen::VectorXd& z) { return eval(z, nullptr); };
      OptimResult r = nelder_mead_box(plain, starts[s], ps.z_box, cfg.max_evals);
      outcomes[s] = {r.f, r.x, r.projected_grad_norm};
    } else {
      OptimResult r = lbfgs_box(eval, starts[s], ps.z_box, cfg.max_evals);
      outcomes[s] = {r.f, r.x, r.projected_grad_norm};
    }
  });

  int best = -1;
  for (std::size_t s = 0; s < outcomes.size(); ++s) {
    if (!std::isfinite(outcomes[s].f)) continue;
    if (best < 0 || outcomes[s].f < outcomes[best].f) best = static_cast<int>(s);
  }
  if (best < 0)
    throw numeric_error(
        "fit_ml: every start failed to factorize the covariance matrix");

  Eigen::VectorXd params = canonical;
  const Eigen::VectorXd x_best = ps.vec_from_z(outcomes[best].z);
  for (int k = 0; k < ps.dim(); ++k) params[ps.idx[k]] = x_best[k];
  const KernelSpec spec_hat = kernel_with_params(spec0, params);

  const Eigen::MatrixXd r = gram_from_cache(spec_hat, cache);
  const CholOutcome chol = chol_with_jitter(r, cfg.jitter);

  GPModel model;
  model.spec = spec_hat;
  model.inputs = data.inputs;
  model.features = std::move(features);
  model.chol = chol.lower;
  model.alpha = chol.lower.triangularView<Eigen::Lower>().transpose().solve(
      Eigen::VectorXd(chol.lower.triangularView<Eigen::Lower>().solve(y)));
  model.loglik = nll_from_chol(chol.lower, y);
  model.jitter_used = chol.jitter;
  model.jitter_config = cfg.jitter;
  model.target_offset = offset;
  model.grad_norm = outcomes[best].grad_norm;
  model.free_params = ps.idx;
  return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace {

Prediction predict_impl(const GPModel& model, const Eigen::VectorXd& r_vec,
                        double k_self) {
  const Eigen::VectorXd v =
      model.chol.triangularView<Eigen::Lower>().solve(r_vec);
  Prediction out;
  out.mean = r_vec.dot(model.alpha) + model.target_offset;
  double var = k_self - v.squaredNorm();
  if (var < 0.0) {
    if (var >= -1e-8 * std::max(k_self, 1e-300)) {
      std::cerr << "wgp: clamping small negative predictive variance ("
                << var << ")\n";
      var = 0.0;
    } else {
      throw numeric_error("predictive variance " + std::to_string(var) +
                          " is negative beyond the clamping threshold");
    }
  }
  out.variance = var;
  return out;
}

}  // namespace

Prediction predict(const GPModel& model, const QuantileFunction& query) {
  const int n = model.size();
  if (n == 0) throw invalid_input("predict: empty model");
  if (query.grid_size() != model.inputs[0].grid_size())
    throw invalid_input("predict: query grid does not match the model grid");

  Eigen::VectorXd r(n);
  double k_self;
  if (const auto* p = std::get_if<PowexpSpec>(&model.spec)) {
    for (int i = 0; i < n; ++i) {
      const double w = w2_distance(query, model.inputs[i]);
      r[i] = powexp_eval(*p, w, w == 0.0);
    }
    k_self = p->sigma2 + p->delta;
  } else if (const auto* f = std::get_if<FbmSpec>(&model.spec)) {
    for (int i = 0; i < n; ++i) r[i] = fbm_kernel(*f, query, model.inputs[i]);
    const double w0 = w2_distance(f->origin, query);
    k_self = std::pow(w0, 2.0 * f->h);
  } else {
    throw invalid_input(
        "projection models predict from features; use the FeatureVector "
        "overload");
  }
  return predict_impl(model, r, k_self);
}

Prediction predict(const GPModel& model, const FeatureVector& query) {
  const int n = model.size();
  if (!is_projection(family_of(model.spec)))
    throw invalid_input("feature prediction needs a projection model");
  if (static_cast<int>(model.features.size()) != n)
    throw invalid_input("model carries no training features");

  Eigen::VectorXd r(n);
  double k_self;
  if (const auto* l = std::get_if<LegendreSpec>(&model.spec)) {
    for (int i = 0; i < n; ++i)
      r[i] = projection_kernel(*l, query, model.features[i]);
    k_self = l->sigma2;
  } else {
    const auto& c = std::get<PcaSpec>(model.spec);
    for (int i = 0; i < n; ++i)
      r[i] = projection_kernel(c, query, model.features[i]);
    k_self = c.sigma2;
  }
  return predict_impl(model, r, k_self);
}

FeatureVector model_features(const GPModel& model, const GridDensity& g) {
  if (const auto* l = std::get_if<LegendreSpec>(&model.spec))
    return legendre_features(g, l->order);
  if (const auto* c = std::get_if<PcaSpec>(&model.spec))
    return pca_features(g, c->basis);
  throw invalid_input("model_features needs a projection model");
}

// ---------------------------------------------------------------------------
// Information matrix and quality criteria
// ---------------------------------------------------------------------------

InfoMatrix info_matrix_for(const KernelSpec& spec,
                           const std::vector<QuantileFunction>& inputs,
                           const std::vector<FeatureVector>& features,
                           const std::vector<int>& param_idx, double jitter) {
  const bool proj = is_projection(family_of(spec));
  KernelCache cache = proj ? build_cache(spec, features)
                           : build_cache(spec, inputs, 1);
  const Eigen::MatrixXd r = gram_from_cache(spec, cache);
  const CholOutcome chol = chol_with_jitter(r, jitter);
  const auto derivs = derivs_from_cache(spec, cache);
  const auto names = kernel_param_names(spec);

  const int n = cache.n;
  const int p = static_cast<int>(param_idx.size());
  // B_i = L^{-1} dR_i L^{-T} makes M a Gram matrix of the B_i, hence
  // symmetric positive semidefinite by construction.
  std::vector<Eigen::MatrixXd> b(p);
  for (int k = 0; k < p; ++k) {
    const int i = param_idx[k];
    if (i < 0 || i >= static_cast<int>(derivs.size()))
      throw invalid_input("info_matrix: parameter index out of range");
    Eigen::MatrixXd half =
        chol.lower.triangularView<Eigen::Lower>().solve(derivs[i]);
    b[k] = chol.lower.triangularView<Eigen::Lower>()
               .solve(Eigen::MatrixXd(half.transpose()));
  }

  InfoMatrix out;
  out.m.resize(p, p);
  for (int a = 0; a < p; ++a)
    for (int c = a; c < p; ++c) {
      const double v = b[a].cwiseProduct(b[c]).sum() / (2.0 * n);
      out.m(a, c) = v;
      out.m(c, a) = v;
    }
  for (int k = 0; k < p; ++k) out.param_names.push_back(names[param_idx[k]]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.m);
  out.eigenvalues = eig.eigenvalues();
  return out;
}

InfoMatrix info_matrix(const GPModel& model) {
  return info_matrix_for(model.spec, model.inputs, model.features,
                         model.free_params, model.jitter_config);
}

double rmse(std::span<const double> preds, std::span<const double> truths) {
  if (preds.size() != truths.size() || preds.empty())
    throw invalid_input("rmse: lengths differ or empty");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - truths[i];
    s += e * e;
  }
  return std::sqrt(s / preds.size());
}

double cir(std::span<const double> preds, std::span<const double> sds,
           std::span<const double> truths, double alpha) {
  if (preds.size() != truths.size() || preds.size() != sds.size() ||
      preds.empty())
    throw invalid_input("cir: lengths differ or empty");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw invalid_input("cir: alpha must lie in (0,1)");
  for (double s : sds)
    if (!(s >= 0.0)) throw invalid_input("cir: standard deviations must be >= 0");
  const double q = normal_quantile(0.5 + 0.5 * alpha);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (std::abs(preds[i] - truths[i]) <= q * sds[i]) ++covered;
  return static_cast<double>(covered) / preds.size();
}

}  // namespace wgp
