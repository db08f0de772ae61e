#include "zoqn/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace zoqn {

namespace {

// Right-hand side of the test inequality (without theta^2): ||g||^2 for the
// norm test, ||H g||^4 for the inner product quasi-Newton test.
double test_rhs(SampleTestKind kind, const GradientEstimate& est,
                const LbfgsMemory& memory, bool* stationary) {
  if (kind == SampleTestKind::Norm) {
    const double gnorm = est.mean.norm();
    *stationary = gnorm <= kStationaryTolerance;
    return gnorm * gnorm;
  }
  const double hg_norm = memory.apply_H(est.mean).norm();
  *stationary = hg_norm <= kStationaryTolerance;
  return hg_norm * hg_norm * hg_norm * hg_norm;
}

double test_variance(SampleTestKind kind, const GradientEstimate& est,
                     const LbfgsMemory& memory) {
  return kind == SampleTestKind::Norm ? norm_variance(est)
                                      : ipqn_variance(est, memory);
}

}  // namespace

TestVerdict test_satisfied(const SamplingPolicy& policy, const GradientEstimate& est,
                           const LbfgsMemory& memory, double theta) {
  bool stationary = false;
  const double rhs = test_rhs(policy.kind, est, memory, &stationary);
  if (stationary) return TestVerdict::Stationary;
  if (est.size() < 2) return TestVerdict::NotSatisfied;
  const double var = test_variance(policy.kind, est, memory);
  return var / static_cast<double>(est.size()) <= theta * theta * rhs
             ? TestVerdict::Satisfied
             : TestVerdict::NotSatisfied;
}

GrowthResult grow_to_least_sufficient(const SamplingPolicy& policy,
                                      const StochasticObjective& obj,
                                      const Eigen::VectorXd& x,
                                      GradientEstimate est, double theta,
                                      const LbfgsMemory& memory,
                                      std::uint64_t run_seed,
                                      std::uint64_t& next_index) {
  GrowthResult result;
  result.verdict = test_satisfied(policy, est, memory, theta);

  auto grow_to = [&](std::size_t target) {
    target = std::min(target, policy.cap);
    if (target <= est.size()) return;
    SampleSet fresh = draw_set(run_seed, target - est.size(), next_index);
    extend_estimate(obj, x, est, fresh.ids);
  };

  while (result.verdict == TestVerdict::NotSatisfied && est.size() < policy.cap) {
    if (result.rounds >= kMaxGrowthRounds) {
      // Projection kept missing; one final clamp to the cap settles it.
      grow_to(policy.cap);
      result.verdict = test_satisfied(policy, est, memory, theta);
      break;
    }
    std::size_t projected = 0;
    if (est.size() < 2) {
      projected = 2;
    } else {
      bool stationary = false;
      const double rhs = test_rhs(policy.kind, est, memory, &stationary);
      const double var = test_variance(policy.kind, est, memory);
      const double needed = var / (theta * theta * rhs);
      projected = needed >= static_cast<double>(policy.cap)
                      ? policy.cap
                      : static_cast<std::size_t>(std::ceil(needed));
      projected = std::max(projected, est.size() + 1);
    }
    grow_to(projected);
    result.rounds += 1;
    result.verdict = test_satisfied(policy, est, memory, theta);
  }

  result.cap_hit =
      result.verdict == TestVerdict::NotSatisfied && est.size() >= policy.cap;
  result.estimate = std::move(est);
  return result;
}

ThetaState update_theta(ThetaState state, std::size_t cur_size) {
  if (cur_size == state.prev_size) {
    state.theta *= state.gamma;
  } else {
    state.theta = state.theta0;
  }
  state.prev_size = cur_size;
  return state;
}

}  // namespace zoqn
