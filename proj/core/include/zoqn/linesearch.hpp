#pragma once

#include <vector>

#include <Eigen/Core>

#include "zoqn/gradients.hpp"
#include "zoqn/problems.hpp"

namespace zoqn {

struct LineSearchConfig {
  double c1 = 1e-4;        // sufficient-decrease slope factor, in (0, 0.5)
  double c2 = 1e-14;       // additive decrease slack, > 0
  double tau = 0.5;        // backtracking factor, in (0, 1)
  double alpha_min = 0.0;  // > 0 enables the nonsmooth safeguard
  // Deep enough to walk the step down from 1 to ~1e-240: the scaled
  // benchmark starts put some objectives at astronomical values, and the
  // first few searches legitimately need hundreds of reductions.
  int max_backtracks = 800;

  void validate() const;  // throws std::invalid_argument on bad ranges
};

/// The sufficient-decrease predicate on subsampled means:
///   f_trial <= f_base - c1 * alpha * gHg + c2.
bool sufficient_decrease(double f_trial, double f_base, double alpha, double gHg,
                         double c1, double c2);

/// Heuristic initial trial step (1 + Var / (|S| ||g||^2))^{-1}. Always in
/// (0, 1]. Throws std::domain_error at a stationary estimate (||g|| ~ 0).
double initial_step(const GradientEstimate& est);

struct LineSearchResult {
  double alpha = 0.0;
  Eigen::VectorXd x_next;
  std::vector<double> f_next_per_sample;  // f(x_next, zeta_i), for reuse
  double f_next_mean = 0.0;
  int trials = 0;                   // trial points evaluated
  bool condition_waived = false;    // nonsmooth safeguard took alpha_min
  bool backtracks_exhausted = false;  // smooth mode ran out of reductions
};

/// Backtracking search on the subsampled function along p from x, starting
/// at the heuristic initial step. Each trial costs |S| evaluations (minus
/// cache hits); F_S(x) reuses the estimate's base values. When alpha_min > 0
/// and a reduction would fall below it, alpha_min is returned with the
/// condition waived. The accepted point's per-sample values are cached for
/// the curvature update.
LineSearchResult backtrack(const StochasticObjective& obj, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& p, const GradientEstimate& est,
                           const LineSearchConfig& cfg);

}  // namespace zoqn
