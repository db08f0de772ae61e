#include "zoqn/linesearch.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "zoqn/sampling.hpp"

namespace zoqn {

void LineSearchConfig::validate() const {
  if (!(c1 > 0.0 && c1 < 0.5)) throw std::invalid_argument("c1 must be in (0, 0.5)");
  if (!(c2 > 0.0)) throw std::invalid_argument("c2 must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in (0, 1)");
  if (alpha_min < 0.0) throw std::invalid_argument("alpha_min must be >= 0");
  if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be >= 1");
}

bool sufficient_decrease(double f_trial, double f_base, double alpha, double gHg,
                         double c1, double c2) {
  return f_trial <= f_base - c1 * alpha * gHg + c2;
}

double initial_step(const GradientEstimate& est) {
  const double g_norm = est.mean.norm();
  if (g_norm <= kStationaryTolerance) {
    throw std::domain_error("initial_step: stationary gradient estimate");
  }
  const double var = norm_variance(est);
  return 1.0 / (1.0 + var / (static_cast<double>(est.size()) * g_norm * g_norm));
}

LineSearchResult backtrack(const StochasticObjective& obj, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& p, const GradientEstimate& est,
                           const LineSearchConfig& cfg) {
  cfg.validate();
  const double f_base = est.base_mean();
  const double gHg = -est.mean.dot(p);  // p = -H g, so g^T H g = -g^T p

  LineSearchResult result;
  const std::size_t n = est.size();
  std::vector<double> trial_values(n);

  // Evaluates F_S at x + alpha p; per-sample values land in trial_values.
  // Overflowing trials simply fail the decrease condition and keep shrinking.
  auto evaluate_trial = [&](double alpha) {
    const Eigen::VectorXd x_trial = x + alpha * p;
    for (std::size_t i = 0; i < n; ++i) {
      trial_values[i] = obj.value(x_trial, est.sample.ids[i]);
    }
    result.trials += 1;
    return x_trial;
  };
  auto trial_mean = [&] {
    for (double v : trial_values) {
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    }
    return pairwise_mean(trial_values);
  };

  double alpha = initial_step(est);
  Eigen::VectorXd x_trial = evaluate_trial(alpha);
  double f_trial = trial_mean();
  int reductions = 0;
  while (!sufficient_decrease(f_trial, f_base, alpha, gHg, cfg.c1, cfg.c2)) {
    const double alpha_next = cfg.tau * alpha;
    if (cfg.alpha_min > 0.0 && alpha_next < cfg.alpha_min) {
      // Nonsmooth safeguard: take alpha_min and skip the condition.
      alpha = cfg.alpha_min;
      x_trial = evaluate_trial(alpha);
      f_trial = trial_mean();
      result.condition_waived = true;
      break;
    }
    if (reductions >= cfg.max_backtracks) {
      result.backtracks_exhausted = true;
      break;
    }
    alpha = alpha_next;
    reductions += 1;
    x_trial = evaluate_trial(alpha);
    f_trial = trial_mean();
  }
  if (!std::isfinite(f_trial)) {
    throw std::runtime_error(
        "evaluation failure: line search ended on a non-finite value");
  }

  // Record the accepted point's values for reuse by the curvature update.
  if (obj.cache() != nullptr) {
    for (std::size_t i = 0; i < n; ++i) {
      obj.cache()->store(x_trial, est.sample.ids[i], trial_values[i]);
    }
  }

  result.alpha = alpha;
  result.x_next = std::move(x_trial);
  result.f_next_per_sample = std::move(trial_values);
  result.f_next_mean = f_trial;
  return result;
}

}  // namespace zoqn
