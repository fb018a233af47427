#pragma once

#include <Eigen/Dense>
#include <functional>

#include "wgp/common.hpp"

namespace wgp {

struct BoxBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  void validate() const;
  Eigen::VectorXd clamp(Eigen::VectorXd x) const;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  int iterations = 0;
  double projected_grad_norm = 0.0;
  bool converged = false;
};

/// Objective with gradient: returns f(x), fills *grad when non-null.
using GradObjective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd* grad)>;
using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Limited-memory BFGS with box constraints handled by projected
/// backtracking line search. Monotone: the returned point never exceeds the
/// objective at x0. Non-finite objective values abandon the current line
/// search, so unstable regions act as soft barriers.
OptimResult lbfgs_box(const GradObjective& fg, Eigen::VectorXd x0,
                      const BoxBounds& box, int max_evals, double tol = 1e-9);

/// Nelder-Mead simplex with candidates clamped into the box. Used for the
/// fBm likelihood whose H-derivative is analytically available but unstable
/// near coincident inputs.
OptimResult nelder_mead_box(const Objective& f, Eigen::VectorXd x0,
                            const BoxBounds& box, int max_evals,
                            double tol = 1e-10);

/// Deterministic space-filling start sequence on [0,1)^dim: radical-inverse
/// (Halton) points with a seeded Cranley-Patterson rotation. Prefix-stable,
/// so enlarging the start budget only ever adds candidates.
class HaltonSequence {
 public:
  HaltonSequence(int dim, std::uint64_t seed);
  Eigen::VectorXd next();

 private:
  std::vector<int> bases_;
  Eigen::VectorXd shift_;
  std::uint64_t index_ = 1;
};

}  // namespace wgp
