#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "zoqn/crn.hpp"
#include "zoqn/gradients.hpp"
#include "zoqn/lbfgs.hpp"
#include "zoqn/sampling.hpp"

namespace zoqn::oracles {

/// Materializes the inverse Hessian defined by a pair sequence: starts from
/// kappa I (kappa from the newest pair, 1 when empty) and applies
/// H <- V^T H V + rho s s^T, V = I - rho y s^T, oldest pair first. Checks
/// the implicit two-loop recursion against explicit dense algebra.
Eigen::MatrixXd dense_H(const std::vector<CurvaturePair>& pairs, int dim);

/// Re-evaluates a sampling test verdict from raw per-sample gradients with
/// plain loops and the dense matrix above; shares no code path with
/// zoqn::test_satisfied beyond primitive arithmetic.
bool brute_force_test(const GradientEstimate& est,
                      const std::vector<CurvaturePair>& pairs, double theta,
                      SampleTestKind kind);

struct MonteCarloMean {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Sample mean and standard error of f over ids (seed, 0), ..., (seed, n-1).
MonteCarloMean monte_carlo_mean(const std::function<double(SampleId)>& f,
                                std::uint64_t n, std::uint64_t seed);

/// Central-difference gradient, independent of the forward-difference
/// estimators under test.
Eigen::VectorXd central_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step);

/// Draws a random accepted curvature-pair sequence (each pair passes the
/// smooth acceptance rule) for recursion cross-checks.
std::vector<CurvaturePair> random_accepted_pairs(int dim, int count,
                                                 std::uint64_t seed);

/// Runs the oracle/property battery behind the CLI `verify` subcommand;
/// prints one line per check and returns true when all pass.
bool run_verification_suite(std::ostream& out);

}  // namespace zoqn::oracles
