#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "zoqn/crn.hpp"

namespace zoqn {

enum class NoiseModel {
  Abs,        // f(x,z) = sum_j ((phi_j + z_j)^2 - sigma^2),   z ~ N(0, sigma^2 I_p)
  Rel,        // f(x,z) = 1/(1+sigma^2) sum_j phi_j^2 (1+z_j)^2, z ~ N(0, sigma^2 I_p)
  UniformL1,  // f(x,z) = sum_i |a_i^T x - b_i - z_i|,          z ~ Uniform(-1,1)^p
};

struct NonsmoothData {
  Eigen::MatrixXd A;       // p x d, symmetric by construction
  Eigen::VectorXd b;       // b = A * x_star
  Eigen::VectorXd x_star;  // zero-residual point
};

/// A stochastic objective instance: residual map (by registry name), noise
/// model and its scale, starting point, and optional analytic metadata.
struct ProblemSpec {
  std::string name;
  int d = 0;  // input dimension
  int p = 0;  // residual dimension
  NoiseModel noise = NoiseModel::Abs;
  double sigma = 0.0;  // > 0 for Abs/Rel, unused for UniformL1
  Eigen::VectorXd x0;
  std::optional<double> lipschitz_hint;
  std::optional<NonsmoothData> nonsmooth;
};

/// Counts stochastic function evaluations f(x, zeta). Cache hits do not
/// increment. Atomic so estimates may be evaluated concurrently.
class EvalCounter {
 public:
  std::uint64_t total() const { return total_.load(std::memory_order_relaxed); }
  void increment() { total_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> total_{0};
};

/// Per-iteration cache of f(x, id) values keyed by the exact bits of x and
/// the sample index. Base-point values computed once (gradient bases, the
/// accepted line-search point) are reused instead of re-evaluated; the
/// solver clears the cache when the iterate advances.
class EvalCache {
 public:
  std::optional<double> lookup(const Eigen::VectorXd& x, SampleId id) const;
  void store(const Eigen::VectorXd& x, SampleId id, double value);
  void clear();
  std::size_t size() const;

 private:
  struct Slot {
    Eigen::VectorXd x;
    std::vector<std::pair<std::uint64_t, double>> by_index;  // sorted
  };
  const Slot* find_slot(const Eigen::VectorXd& x) const;
  Slot* find_slot(const Eigen::VectorXd& x);

  std::vector<Slot> slots_;
};

// ---------------------------------------------------------------------------
// Problem registry
// ---------------------------------------------------------------------------

struct ProblemDefinition {
  int d = 0;
  int p = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  Eigen::VectorXd standard_start;  // x_s; solvers start from 10 * x_s
};

/// Returns the definition for a registered problem; throws
/// std::invalid_argument for unknown names. Built-in names:
/// chebyquad, osborne, bdqrtic, cube, heart8ls.
const ProblemDefinition& problem_definition(std::string_view name);

/// Registers a problem definition (used by tests for synthetic objectives).
/// Re-registering an existing name replaces it.
void register_problem(std::string name, ProblemDefinition def);

bool is_registered_problem(std::string_view name);

/// Residual map phi(x) of the named problem. Throws on unknown name or
/// dimension mismatch.
Eigen::VectorXd residuals(std::string_view name, const Eigen::VectorXd& x);

/// Jacobian of the residual map (analytic transcription, used by the
/// noise-free reference solve and checked against central differences).
Eigen::MatrixXd residual_jacobian(std::string_view name, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Stochastic and expected values
// ---------------------------------------------------------------------------

/// Applies a noise model to a residual vector: the pure functional core of
/// stochastic_value, exposed for direct testing.
double noisy_value(const Eigen::VectorXd& phi, NoiseModel noise, double sigma,
                   const Eigen::VectorXd& zeta);

/// One stochastic evaluation f(x, zeta(id)). Increments `counter` unless the
/// value is served from `cache` (which is only consulted/filled when
/// non-null). Throws on dimension mismatch.
double stochastic_value(const ProblemSpec& spec, const Eigen::VectorXd& x,
                        SampleId id, EvalCounter& counter,
                        EvalCache* cache = nullptr);

/// Noise-free oracle E_zeta[f(x, zeta)]; never touches the counter and is
/// not available to solvers except for reporting and reference computation.
double expected_value(const ProblemSpec& spec, const Eigen::VectorXd& x);

/// Gradient of the expected function. Smooth problems: 2 J(x)^T phi(x);
/// the l1 problem uses the clipped-residual closed form.
Eigen::VectorXd expected_gradient(const ProblemSpec& spec, const Eigen::VectorXd& x);

/// Closed-form gradient of the l1 problem's expectation.
Eigen::VectorXd expected_gradient_nonsmooth(const ProblemSpec& spec,
                                            const Eigen::VectorXd& x);

/// Closed-form Hessian of the l1 problem's expectation; throws
/// std::domain_error when some |a_i^T x - b_i| equals 1 exactly (kink
/// boundary, Hessian undefined).
Eigen::MatrixXd expected_hessian_nonsmooth(const ProblemSpec& spec,
                                           const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Instance construction
// ---------------------------------------------------------------------------

/// Builds the random nonsmooth instance: A = (G + G^T)/2 with standard
/// normal G, x_star standard normal, b = A x_star. Deterministic in
/// run_seed. Requires d == p.
ProblemSpec make_nonsmooth_instance(std::uint64_t run_seed, int d, int p);

/// Builds a smooth problem spec for a registered name with the given noise
/// model; x0 = 10 * standard start. Throws for UniformL1 (use
/// make_nonsmooth_instance).
ProblemSpec make_problem(std::string_view name, NoiseModel noise, double sigma);

/// The solver starting point: 10 * x_s for smooth problems; for the l1
/// instance a standard-normal vector keyed to run_seed (already stored in
/// the spec by make_nonsmooth_instance).
Eigen::VectorXd initial_point(const ProblemSpec& spec);

/// Names accepted by the experiment CLI, in canonical order.
const std::vector<std::string>& benchmark_problem_names();

// ---------------------------------------------------------------------------
// Objective handle
// ---------------------------------------------------------------------------

/// Binds an evaluation function to a counter (and optional cache). Solver
/// machinery consumes this instead of ProblemSpec directly, so tests can
/// supply synthetic objectives.
class StochasticObjective {
 public:
  using EvalFn = std::function<double(const Eigen::VectorXd&, SampleId)>;

  StochasticObjective(EvalFn fn, EvalCounter& counter, EvalCache* cache = nullptr)
      : fn_(std::move(fn)), counter_(&counter), cache_(cache) {}

  /// Evaluates f(x, id), consulting the cache for base points.
  double value(const Eigen::VectorXd& x, SampleId id) const;

  /// Evaluates and records the result as a reusable base-point value.
  double value_cached(const Eigen::VectorXd& x, SampleId id) const;

  EvalCounter& counter() const { return *counter_; }
  EvalCache* cache() const { return cache_; }
  void clear_cache() const;

 private:
  EvalFn fn_;
  EvalCounter* counter_;
  EvalCache* cache_;
};

/// Objective bound to a ProblemSpec.
StochasticObjective make_objective(const ProblemSpec& spec, EvalCounter& counter,
                                   EvalCache* cache = nullptr);

}  // namespace zoqn
