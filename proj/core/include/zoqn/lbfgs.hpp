#pragma once

#include <deque>

#include <Eigen/Core>

namespace zoqn {

/// One accepted curvature pair: s = x_{k+1} - x_k, y = gradient difference
/// measured on the same sample set, rho = 1 / (y^T s) > 0.
struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho = 0.0;
};

enum class CurvatureMode { Smooth, Nonsmooth };

/// Bounded FIFO queue of curvature pairs defining the implicit inverse
/// Hessian H. Pairs are admitted only through the mode's acceptance rule:
/// smooth mode requires y^T s > beta1 ||s||^2 and ||s|| > beta2; nonsmooth
/// mode replaces the length condition with ||y|| <= M ||s||.
class LbfgsMemory {
 public:
  LbfgsMemory(int capacity, CurvatureMode mode)
      : capacity_(capacity), mode_(mode) {}

  /// Attempts to store a pair; returns whether it was accepted. On accept at
  /// capacity, the oldest pair is evicted first. Throws on empty vectors or
  /// mismatched lengths.
  bool try_store(const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                 double beta1, double beta2, double lipschitz_cap);

  /// Applies the implicit inverse Hessian via the standard two-loop
  /// recursion, with initial scaling kappa = y^T s / y^T y taken from the
  /// newest stored pair. Empty memory returns g unchanged (H = I).
  Eigen::VectorXd two_loop(const Eigen::VectorXd& g) const;

  /// Alias of two_loop for H-vector products in the sampling test.
  Eigen::VectorXd apply_H(const Eigen::VectorXd& v) const { return two_loop(v); }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  int capacity() const { return capacity_; }
  CurvatureMode mode() const { return mode_; }
  const std::deque<CurvaturePair>& pairs() const { return pairs_; }
  double initial_scaling() const;  // kappa; 1 when empty
  void clear() { pairs_.clear(); }

 private:
  int capacity_;
  CurvatureMode mode_;
  std::deque<CurvaturePair> pairs_;  // oldest first
};

}  // namespace zoqn
