#include "wgp/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace wgp {

void BoxBounds::validate() const {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw invalid_input("box bounds must be non-empty and of equal size");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw invalid_input("box bounds must satisfy lo < hi and be finite");
  }
}

Eigen::VectorXd BoxBounds::clamp(Eigen::VectorXd x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

namespace {

double projected_grad_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                           const BoxBounds& box) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double gi = g[i];
    if (x[i] <= box.lo[i] && gi > 0.0) gi = 0.0;
    if (x[i] >= box.hi[i] && gi < 0.0) gi = 0.0;
    s += gi * gi;
  }
  return std::sqrt(s);
}

}  // namespace

OptimResult lbfgs_box(const GradObjective& fg, Eigen::VectorXd x0,
                      const BoxBounds& box, int max_evals, double tol) {
  box.validate();
  const Eigen::Index dim = x0.size();
  if (dim != box.lo.size()) throw invalid_input("x0 does not match box size");

  OptimResult res;
  Eigen::VectorXd x = box.clamp(std::move(x0));
  Eigen::VectorXd g(dim);
  double f = fg(x, &g);
  res.evals = 1;
  if (!std::isfinite(f)) {
    res.x = x;
    res.f = f;
    return res;
  }

  const int memory = 8;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  Eigen::VectorXd best_x = x;
  double best_f = f;
  int stall = 0;

  for (int iter = 0; iter < 10 * max_evals && res.evals < max_evals; ++iter) {
    res.iterations = iter;
    const double pg = projected_grad_norm(x, g, box);
    if (pg <= tol * (1.0 + std::abs(f))) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) /
                           y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    if (dir.dot(g) >= 0.0) dir = -g;  // fall back to steepest descent

    // Projected backtracking (Armijo on the actual displacement).
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new(dim), g_new(dim);
    double f_new = f;
    for (int ls = 0; ls < 40 && res.evals < max_evals; ++ls) {
      x_new = box.clamp(x + step * dir);
      const Eigen::VectorXd disp = x_new - x;
      if (disp.squaredNorm() == 0.0) break;
      f_new = fg(x_new, &g_new);
      ++res.evals;
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * g.dot(disp)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double df = f - f_new;
    x = std::move(x_new);
    g = g_new;
    f = f_new;
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    if (df <= 1e-12 * (1.0 + std::abs(f))) {
      if (++stall >= 3) {
        res.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
  }

  res.x = best_x;
  res.f = best_f;
  Eigen::VectorXd g_fin(dim);
  const double f_fin = fg(best_x, &g_fin);
  ++res.evals;
  if (std::isfinite(f_fin))
    res.projected_grad_norm = projected_grad_norm(best_x, g_fin, box);
  return res;
}

OptimResult nelder_mead_box(const Objective& f, Eigen::VectorXd x0,
                            const BoxBounds& box, int max_evals, double tol) {
  box.validate();
  const int dim = static_cast<int>(x0.size());
  if (dim != box.lo.size()) throw invalid_input("x0 does not match box size");

  OptimResult res;
  auto eval = [&](const Eigen::VectorXd& p) {
    ++res.evals;
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  pts.push_back(box.clamp(x0));
  vals.push_back(eval(pts[0]));
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd p = pts[0];
    const double span = box.hi[i] - box.lo[i];
    double step = 0.05 * span;
    if (p[i] + step > box.hi[i]) step = -step;
    p[i] += step;
    pts.push_back(box.clamp(p));
    vals.push_back(eval(pts.back()));
  }

  const int npts = dim + 1;
  std::vector<int> ord(npts);
  for (;;) {
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = ord[0], worst = ord[npts - 1], second = ord[npts - 2];
    ++res.iterations;

    const double spread = std::abs(vals[worst] - vals[best]);
    double diameter = 0.0;
    for (int i = 0; i < npts; ++i)
      diameter = std::max(diameter, (pts[i] - pts[best]).norm());
    const bool tight = spread <= tol * (1.0 + std::abs(vals[best])) &&
                       diameter <= 1e-7 * (1.0 + pts[best].norm());
    if (tight || res.evals >= max_evals) {
      res.converged = tight;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < npts; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= dim;

    const Eigen::VectorXd refl = box.clamp(centroid + (centroid - pts[worst]));
    const double f_refl = eval(refl);
    if (f_refl < vals[best]) {
      const Eigen::VectorXd expa =
          box.clamp(centroid + 2.0 * (centroid - pts[worst]));
      const double f_expa = eval(expa);
      if (f_expa < f_refl) {
        pts[worst] = expa;
        vals[worst] = f_expa;
      } else {
        pts[worst] = refl;
        vals[worst] = f_refl;
      }
    } else if (f_refl < vals[second]) {
      pts[worst] = refl;
      vals[worst] = f_refl;
    } else {
      const Eigen::VectorXd contr =
          box.clamp(centroid + 0.5 * (pts[worst] - centroid));
      const double f_contr = eval(contr);
      if (f_contr < vals[worst]) {
        pts[worst] = contr;
        vals[worst] = f_contr;
      } else {
        for (int i = 0; i < npts; ++i) {
          if (i == best) continue;
          pts[i] = box.clamp(pts[best] + 0.5 * (pts[i] - pts[best]));
          vals[i] = eval(pts[i]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i < npts; ++i)
    if (vals[i] < vals[best]) best = i;
  res.x = pts[best];
  res.f = vals[best];
  return res;
}

namespace {
constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                           37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                           83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
}

HaltonSequence::HaltonSequence(int dim, std::uint64_t seed) {
  if (dim < 1 || dim > static_cast<int>(std::size(kPrimes)))
    throw invalid_input("halton dimension out of range");
  bases_.assign(kPrimes, kPrimes + dim);
  shift_.resize(dim);
  Rng rng(derive_seed(seed, 0xa11ce));
  for (int i = 0; i < dim; ++i) shift_[i] = rng.uniform();
}

Eigen::VectorXd HaltonSequence::next() {
  Eigen::VectorXd u(bases_.size());
  for (std::size_t j = 0; j < bases_.size(); ++j) {
    const int b = bases_[j];
    double inv = 1.0 / b, rad = 0.0;
    for (std::uint64_t n = index_; n > 0; n /= b) {
      rad += static_cast<double>(n % b) * inv;
      inv /= b;
    }
    double v = rad + shift_[j];
    v -= std::floor(v);
    u[j] = v;
  }
  ++index_;
  return u;
}

}  // namespace wgp
