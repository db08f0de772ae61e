#pragma once

#include <cstdint>

#include "zoqn/gradients.hpp"
#include "zoqn/lbfgs.hpp"

namespace zoqn {

/// Adaptive test threshold: shrinks geometrically while sample sizes
/// stagnate and resets to theta0 when they grow.
struct ThetaState {
  double theta = 0.9;
  double theta0 = 0.9;
  double gamma = 0.99;
  std::size_t prev_size = 0;
};

enum class SampleTestKind { Norm, Ipqn };

struct SamplingPolicy {
  SampleTestKind kind = SampleTestKind::Norm;
  std::size_t cap = 10000;       // maximum |S|
  std::size_t initial_size = 2;  // |S_0|
};

enum class TestVerdict {
  Satisfied,
  NotSatisfied,
  Stationary,  // test right-hand side is numerically zero; caller terminates
};

/// Evaluates the sampling test on an estimate:
///   norm:  Var / |S| <= theta^2 ||g||^2
///   ipqn:  Var / |S| <= theta^2 ||H g||^4
/// A sample of size 1 counts as not satisfied (forces growth). Requires the
/// estimate's variance statistic to be computable (|S| >= 2) otherwise.
TestVerdict test_satisfied(const SamplingPolicy& policy, const GradientEstimate& est,
                           const LbfgsMemory& memory, double theta);

struct GrowthResult {
  GradientEstimate estimate;
  TestVerdict verdict = TestVerdict::NotSatisfied;
  bool cap_hit = false;  // cap reached without satisfying the test
  int rounds = 0;        // projection rounds performed
};

/// Grows the sample to the least size satisfying the test: repeatedly
/// projects the required size from the current variance estimate, augments
/// with fresh ids (retaining existing samples and their gradients),
/// re-estimates and re-tests. Bounded to `kMaxGrowthRounds` projection
/// rounds, after which the size is clamped to the cap; failure at the cap is
/// reported via cap_hit rather than an error.
GrowthResult grow_to_least_sufficient(const SamplingPolicy& policy,
                                      const StochasticObjective& obj,
                                      const Eigen::VectorXd& x,
                                      GradientEstimate est, double theta,
                                      const LbfgsMemory& memory,
                                      std::uint64_t run_seed,
                                      std::uint64_t& next_index);

inline constexpr int kMaxGrowthRounds = 5;

/// Threshold below which the test right-hand side counts as numerically
/// stationary.
inline constexpr double kStationaryTolerance = 1e-16;

/// Advances the controller: theta <- theta * gamma when the size is
/// unchanged, otherwise reset to theta0. Records cur_size as prev_size.
ThetaState update_theta(ThetaState state, std::size_t cur_size);

}  // namespace zoqn
