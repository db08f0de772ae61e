#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zoqn/linesearch.hpp"
#include "zoqn/problems.hpp"
#include "zoqn/sampling.hpp"

namespace zoqn {

enum class TerminationStatus {
  Budget,      // evaluation budget exhausted
  MaxIters,    // iteration limit reached
  Stationary,  // test right-hand side numerically zero
  Converged,   // gap fell below the user tolerance (when F* is known)
  Diverged,    // non-finite values encountered (runaway step)
};

std::string to_string(TerminationStatus status);

struct Budgets {
  std::uint64_t max_evals = 500000;
  std::uint64_t max_iters = 10000;
};

struct SolverConfig {
  SamplingPolicy policy;
  double theta0 = 0.9;
  double gamma = 0.99;
  double nu = 1e-8;
  int memory = 10;
  LineSearchConfig linesearch;
  double beta1 = 1e-3;
  double beta2 = 0.0;  // length condition disabled by default
  // Nonsmooth pair bound ||y|| <= M ||s||; 0 derives M from the problem's
  // Lipschitz hint (10 L) or falls back to 1e3.
  double lipschitz_cap = 0.0;
  CurvatureMode mode = CurvatureMode::Smooth;
  Budgets budgets;
  std::uint64_t run_seed = 0;
  double gap_tolerance = 0.0;  // 0 disables the Converged status

  void validate() const;
};

/// One trace row; logged at the end of each completed iteration. fvalue is
/// the noise-free oracle value at the iterate the iteration started from.
struct IterationRow {
  std::uint64_t iter = 0;
  std::uint64_t evals = 0;
  double fvalue = 0.0;
  double gap = 0.0;
  std::uint64_t batch = 0;
  double alpha = 0.0;
  double theta = 0.0;
  bool pair_accepted = false;
  bool test_satisfied = false;

  friend bool operator==(const IterationRow&, const IterationRow&) = default;
};

/// Per-iteration scalars kept for invariant checks; not serialized.
struct IterationDiag {
  double sty = 0.0;      // y^T s
  double s_norm2 = 0.0;  // ||s||^2
  double y_norm2 = 0.0;  // ||y||^2
  double dir_dot_g = 0.0;  // p^T g at this iteration
  double test_theta = 0.0;     // threshold the sampling test ran with
  double test_variance = 0.0;  // variance statistic at the final sample
  double test_rhs = 0.0;       // ||g||^2 (norm) or ||H g||^4 (ipqn)
  bool condition_waived = false;
  bool cap_hit = false;
};

struct RunRecord {
  std::string problem;
  std::string method;
  std::uint64_t run_seed = 0;
  double fstar = 0.0;
  TerminationStatus status = TerminationStatus::MaxIters;
  std::vector<IterationRow> rows;
  std::vector<IterationDiag> diags;  // parallel to rows
  Eigen::VectorXd x_final;

  double initial_gap() const { return rows.empty() ? 0.0 : rows.front().gap; }
  double final_gap() const { return rows.empty() ? 0.0 : rows.back().gap; }
  double best_gap() const;
  /// Evaluations spent when the gap first reached `target`; nullopt if never.
  std::optional<std::uint64_t> evals_to_reach(double target) const;
};

/// The adaptive-sampling finite-difference stochastic L-BFGS driver. `fstar`
/// is the reference optimum used for gap reporting (see
/// compute_reference_optimum).
RunRecord run_fd_lbfgs(const ProblemSpec& spec, const SolverConfig& config,
                       double fstar);

/// Finite-difference stochastic gradient baseline (fixed step, fixed batch).
RunRecord run_fd_sg(const ProblemSpec& spec, double alpha0, std::size_t batch,
                    double nu, const Budgets& budgets, std::uint64_t run_seed,
                    double fstar);

/// Sphere-smoothing stochastic gradient baseline with T directions per
/// iteration.
RunRecord run_ss_sg(const ProblemSpec& spec, double alpha0, std::size_t batch,
                    double nu, int directions, const Budgets& budgets,
                    std::uint64_t run_seed, double fstar);

enum class BaselineMethod { FdSg, SsSg };

struct TuneResult {
  double best_alpha0 = 0.0;
  int best_exponent = 0;
  double best_mean_final_gap = 0.0;
  std::vector<RunRecord> best_records;  // one per seed, for the winning alpha0
};

/// Evaluates a step-length grid alpha0 = 2^j over the given exponents and
/// seeds; the winner minimizes the mean final gap, ties broken toward the
/// smaller exponent.
TuneResult tune_baseline(const ProblemSpec& spec, BaselineMethod method,
                         const std::vector<int>& exponents,
                         const std::vector<std::uint64_t>& seeds,
                         const Budgets& budgets, double fstar,
                         std::size_t batch = 2, double nu = 1e-8,
                         int directions = 5, int workers = 0);

struct ReferenceOptimum {
  double fstar = 0.0;
  Eigen::VectorXd x_ref;
  bool tolerance_met = false;   // reached the gradient tolerance
  std::uint64_t evals = 0;      // noise-free function evaluations spent
};

/// Noise-free reference optimum: deterministic L-BFGS on E[f] using the
/// analytic gradient, stopping at ||grad||_inf <= 1e-10 or 2000 function
/// evaluations. The l1 instance is returned analytically (F* = p/2 at
/// x_star).
ReferenceOptimum compute_reference_optimum(const ProblemSpec& spec);

}  // namespace zoqn
