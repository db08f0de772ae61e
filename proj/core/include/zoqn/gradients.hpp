#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "zoqn/crn.hpp"
#include "zoqn/lbfgs.hpp"
#include "zoqn/problems.hpp"

namespace zoqn {

/// Batch forward-difference gradient estimate at a point. The per-sample
/// gradients and base values f(x, zeta_i) are retained: the sampling tests
/// and the curvature update both consume them.
struct GradientEstimate {
  Eigen::VectorXd mean;                     // average of per_sample
  std::vector<Eigen::VectorXd> per_sample;  // one per id, in set order
  double nu = 0.0;
  SampleSet sample;
  std::vector<double> base_values;  // f(x, zeta_i), reusable as F_S(x)

  std::size_t size() const { return sample.size(); }
  /// Subsampled function value F_S(x) = mean of base_values.
  double base_mean() const;
};

/// Deterministic pairwise sum/mean in index order; the fixed reduction
/// order keeps concurrent and replayed runs bit-identical.
double pairwise_sum(std::span<const double> v);
double pairwise_mean(std::span<const double> v);
Eigen::VectorXd pairwise_mean(const std::vector<Eigen::VectorXd>& v);

/// Per-sample forward-difference gradient: component j is
/// (f(x + nu e_j, zeta) - f(x, zeta)) / nu. Costs d + 1 evaluations minus
/// cache hits. Non-finite values propagate as std::runtime_error.
Eigen::VectorXd fd_gradient_single(const StochasticObjective& obj,
                                   const Eigen::VectorXd& x, SampleId id,
                                   double nu);
Eigen::VectorXd fd_gradient_single(const ProblemSpec& spec, const Eigen::VectorXd& x,
                                   SampleId id, double nu, EvalCounter& counter,
                                   EvalCache* cache = nullptr);

/// Batch estimate over a sample set; (d + 1) |S| evaluations minus cache hits.
GradientEstimate fd_gradient_batch(const StochasticObjective& obj,
                                   const Eigen::VectorXd& x, const SampleSet& set,
                                   double nu);
GradientEstimate fd_gradient_batch(const ProblemSpec& spec, const Eigen::VectorXd& x,
                                   const SampleSet& set, double nu,
                                   EvalCounter& counter, EvalCache* cache = nullptr);

/// Extends an existing estimate in place with freshly drawn ids; existing
/// per-sample gradients are reused, only the new ids are evaluated.
void extend_estimate(const StochasticObjective& obj, const Eigen::VectorXd& x,
                     GradientEstimate& est, std::span<const SampleId> new_ids);

/// Deterministic forward-difference gradient of a noise-free function,
/// [ (F(x + nu e_j) - F(x)) / nu ]_j. Used by oracles and bias checks.
Eigen::VectorXd fd_gradient_deterministic(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double nu);

/// Sample variance of the per-sample gradients about the batch mean,
/// (1 / (|S| - 1)) sum_i || g_i - g ||^2. Requires |S| >= 2.
double norm_variance(const GradientEstimate& est);

/// Sample variance of (H g_i)^T (H g) about ||H g||^2, computed with two
/// H-vector products: w = H g, z = H w, then terms (g_i^T z - ||w||^2)^2.
/// Requires |S| >= 2.
double ipqn_variance(const GradientEstimate& est, const LbfgsMemory& memory);

/// Unit-sphere directions for the sphere-smoothing estimator, deterministic
/// in (run_seed, draw_index). One family is shared across all samples of a
/// call.
std::vector<Eigen::VectorXd> sphere_directions(std::uint64_t run_seed,
                                               std::uint64_t draw_index, int count,
                                               int dim);

/// Sphere-smoothing gradient estimate
///   g = (1/|S|) sum_i (d/T) sum_j [(f(x + nu u_j, zeta_i) - f(x, zeta_i)) / nu] u_j
/// with the supplied directions u_j. Costs |S| (T + 1) evaluations minus
/// cache hits.
Eigen::VectorXd sphere_smoothing_gradient(const StochasticObjective& obj,
                                          const Eigen::VectorXd& x,
                                          const SampleSet& set, double nu,
                                          std::span<const Eigen::VectorXd> directions);

enum class SmoothnessMode { Smooth, Nonsmooth };

/// Optimal forward-difference parameter: 2 sqrt(eps_machine / L) in the
/// smooth case and 2 sqrt(eps_machine / (L (1 + kappa))) in the nonsmooth
/// case. Throws on nonpositive inputs (or negative kappa).
double optimal_fd_parameter(double eps_machine, double lipschitz,
                            SmoothnessMode mode, double kappa = 0.0);

}  // namespace zoqn
