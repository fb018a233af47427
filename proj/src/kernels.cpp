#include "wgp/kernels.hpp"

#include <cmath>

namespace wgp {

KernelFamily family_of(const KernelSpec& spec) {
  if (std::holds_alternative<FbmSpec>(spec)) return KernelFamily::fbm;
  if (std::holds_alternative<PowexpSpec>(spec)) return KernelFamily::powexp;
  if (std::holds_alternative<LegendreSpec>(spec)) return KernelFamily::legendre;
  return KernelFamily::pca;
}

std::string family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::fbm: return "fbm";
    case KernelFamily::powexp: return "powexp";
    case KernelFamily::legendre: return "legendre";
    case KernelFamily::pca: return "pca";
  }
  return "unknown";
}

bool is_projection(KernelFamily family) {
  return family == KernelFamily::legendre || family == KernelFamily::pca;
}

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw invalid_input(std::string(name) + " must be strictly positive");
}

void check_ells(const Eigen::VectorXd& ells, int order) {
  if (static_cast<int>(ells.size()) != order)
    throw invalid_input("ells length must equal the projection order");
  for (Eigen::Index i = 0; i < ells.size(); ++i) check_positive(ells[i], "ell_i");
}

}  // namespace

void validate(const KernelSpec& spec) {
  if (const auto* f = std::get_if<FbmSpec>(&spec)) {
    if (!(f->h > 0.0 && f->h <= 1.0))
      throw invalid_input("fbm requires H in (0,1]");
  } else if (const auto* p = std::get_if<PowexpSpec>(&spec)) {
    check_positive(p->sigma2, "sigma2");
    check_positive(p->ell, "ell");
    if (!(p->h > 0.0 && p->h <= 1.0))
      throw invalid_input("powexp requires H in (0,1]");
    if (!(p->delta >= 0.0) || !std::isfinite(p->delta))
      throw invalid_input("delta must be non-negative");
  } else if (const auto* l = std::get_if<LegendreSpec>(&spec)) {
    if (l->order < 1) throw invalid_input("order must be at least 1");
    check_positive(l->sigma2, "sigma2");
    check_ells(l->ells, l->order);
    if (!(l->h > 0.0 && l->h <= 1.0))
      throw invalid_input("legendre kernel requires H in (0,1]");
  } else {
    const auto& c = std::get<PcaSpec>(spec);
    if (c.order() < 1) throw invalid_input("pca basis must have at least 1 component");
    if (c.basis.mean.size() != c.basis.d || c.basis.components.cols() != c.basis.d)
      throw invalid_input("pca basis dimensions disagree");
    check_positive(c.sigma2, "sigma2");
    check_ells(c.ells, c.order());
    if (!(c.h > 0.0 && c.h <= 1.0))
      throw invalid_input("pca kernel requires H in (0,1]");
  }
}

double fbm_kernel(const FbmSpec& spec, const QuantileFunction& a,
                  const QuantileFunction& b) {
  const double w0a = w2_distance(spec.origin, a);
  const double w0b = w2_distance(spec.origin, b);
  const double wab = w2_distance(a, b);
  const double e = 2.0 * spec.h;
  return 0.5 * (std::pow(w0a, e) + std::pow(w0b, e) - std::pow(wab, e));
}

double powexp_eval(const PowexpSpec& spec, double w, bool same_point) {
  double k = spec.sigma2 * std::exp(-std::pow(w, 2.0 * spec.h) / spec.ell);
  if (same_point) k += spec.delta;
  return k;
}

double powexp_kernel(const PowexpSpec& spec, const QuantileFunction& a,
                     const QuantileFunction& b) {
  const double w = w2_distance(a, b);
  return powexp_eval(spec, w, w == 0.0);
}

double projection_eval(double sigma2, const Eigen::VectorXd& ells, double h,
                       const Eigen::VectorXd& coord_absdiff) {
  if (coord_absdiff.size() != ells.size())
    throw invalid_input("feature lengths differ from ells");
  const double s = (coord_absdiff.array() / ells.array()).sum();
  return sigma2 * std::exp(-std::pow(s, h));
}

double projection_kernel(const LegendreSpec& spec, const FeatureVector& fa,
                         const FeatureVector& fb) {
  if (fa.coeffs.size() != fb.coeffs.size())
    throw invalid_input("feature lengths differ");
  return projection_eval(spec.sigma2, spec.ells, spec.h,
                         (fa.coeffs - fb.coeffs).cwiseAbs());
}

double projection_kernel(const PcaSpec& spec, const FeatureVector& fa,
                         const FeatureVector& fb) {
  if (fa.coeffs.size() != fb.coeffs.size())
    throw invalid_input("feature lengths differ");
  return projection_eval(spec.sigma2, spec.ells, spec.h,
                         (fa.coeffs - fb.coeffs).cwiseAbs());
}

Eigen::MatrixXd legendre_basis(int d, int order) {
  if (order < 1) throw invalid_input("order must be at least 1");
  if (d <= order) throw invalid_input("density grid too coarse for the order");

  Eigen::VectorXd x(d), wt(d);
  const double dx = 1.0 / (d - 1);
  for (int j = 0; j < d; ++j) {
    x[j] = j * dx;
    wt[j] = (j == 0 || j == d - 1) ? 0.5 * dx : dx;
  }

  // Shifted Legendre recurrence seeds the rows; a double modified
  // Gram-Schmidt pass against the trapezoid inner product then makes the
  // discrete orthonormality exact, so projections of exactly representable
  // densities carry no quadrature bias.
  Eigen::MatrixXd basis(order, d);
  Eigen::VectorXd prev = Eigen::VectorXd::Ones(d);
  Eigen::VectorXd curr = 2.0 * x.array() - 1.0;
  for (int i = 0; i < order; ++i) {
    if (i == 0) {
      basis.row(i) = prev;
    } else if (i == 1) {
      basis.row(i) = curr;
    } else {
      const Eigen::VectorXd next =
          ((2.0 * i - 1.0) * (2.0 * x.array() - 1.0) * curr.array() -
           (i - 1.0) * prev.array()) /
          static_cast<double>(i);
      prev = curr;
      curr = next;
      basis.row(i) = curr;
    }
  }

  auto dot = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return (u.array() * v.array() * wt.array()).sum();
  };
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < order; ++i) {
      Eigen::VectorXd v = basis.row(i);
      for (int k = 0; k < i; ++k) {
        const Eigen::VectorXd pk = basis.row(k);
        v -= dot(pk, v) * pk;
      }
      const double norm = std::sqrt(dot(v, v));
      if (!(norm > 0.0)) throw numeric_error("legendre basis degenerated");
      basis.row(i) = v / norm;
    }
  }
  return basis;
}

FeatureVector legendre_features(const GridDensity& g, int order) {
  if (std::abs(g.support_lo()) > 1e-12 || std::abs(g.support_hi() - 1.0) > 1e-12)
    throw invalid_input("legendre features require support [0,1]");
  const int d = g.size();
  const Eigen::MatrixXd basis = legendre_basis(d, order);
  const double dx = g.dx();
  Eigen::VectorXd wt = Eigen::VectorXd::Constant(d, dx);
  wt[0] *= 0.5;
  wt[d - 1] *= 0.5;
  FeatureVector out;
  out.coeffs = basis * g.values().cwiseProduct(wt);
  return out;
}

PcaBasis pca_fit(const std::vector<GridDensity>& densities, int order,
                 bool project_centered) {
  if (order < 1) throw invalid_input("order must be at least 1");
  const int n = static_cast<int>(densities.size());
  if (n < order)
    throw invalid_input("pca_fit needs at least `order` densities");
  const int d = densities[0].size();
  for (const auto& g : densities) {
    if (g.size() != d) throw invalid_input("pca densities must share one grid");
    if (std::abs(g.support_lo() - densities[0].support_lo()) > 1e-12 ||
        std::abs(g.support_hi() - densities[0].support_hi()) > 1e-12)
      throw invalid_input("pca densities must share one support");
  }

  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i) data.row(i) = densities[i].values();
  Eigen::VectorXd mean = data.colwise().mean();
  data.rowwise() -= mean.transpose();

  const Eigen::MatrixXd cov = data.transpose() * data / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw numeric_error("pca eigensolve failed");

  PcaBasis basis;
  basis.d = d;
  basis.mean = std::move(mean);
  basis.components.resize(order, d);
  basis.project_centered = project_centered;
  for (int i = 0; i < order; ++i) {
    // Eigenvalues come out ascending.
    Eigen::VectorXd w = eig.eigenvectors().col(d - 1 - i);
    Eigen::Index arg = 0;
    w.cwiseAbs().maxCoeff(&arg);
    if (w[arg] < 0.0) w = -w;
    basis.components.row(i) = w;
  }
  return basis;
}

FeatureVector pca_features(const GridDensity& g, const PcaBasis& basis) {
  if (g.size() != basis.d)
    throw invalid_input("density grid does not match the pca basis");
  Eigen::VectorXd v = g.values();
  if (basis.project_centered) v -= basis.mean;
  FeatureVector out;
  out.coeffs = basis.components * v / static_cast<double>(basis.d);
  return out;
}

}  // namespace wgp
