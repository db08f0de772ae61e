#include "zoqn/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace zoqn {

std::string to_string(TerminationStatus status) {
  switch (status) {
    case TerminationStatus::Budget: return "budget";
    case TerminationStatus::MaxIters: return "max_iters";
    case TerminationStatus::Stationary: return "stationary";
    case TerminationStatus::Converged: return "converged";
    case TerminationStatus::Diverged: return "diverged";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  linesearch.validate();
  if (!(theta0 > 0.0)) throw std::invalid_argument("theta0 must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must be in (0, 1)");
  }
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (memory < 1) throw std::invalid_argument("memory must be >= 1");
  if (!(beta1 > 0.0)) throw std::invalid_argument("beta1 must be positive");
  if (beta2 < 0.0) throw std::invalid_argument("beta2 must be >= 0");
  if (policy.initial_size < 1) {
    throw std::invalid_argument("initial sample size must be >= 1");
  }
  if (policy.cap < policy.initial_size) {
    throw std::invalid_argument("sample cap below initial size");
  }
  if (budgets.max_evals < 1 || budgets.max_iters < 1) {
    throw std::invalid_argument("budgets must be >= 1");
  }
}

double RunRecord::best_gap() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) best = std::min(best, row.gap);
  return best;
}

std::optional<std::uint64_t> RunRecord::evals_to_reach(double target) const {
  for (const auto& row : rows) {
    if (row.gap <= target) return row.evals;
  }
  return std::nullopt;
}

namespace {

double derive_lipschitz_cap(const ProblemSpec& spec, const SolverConfig& config) {
  if (config.lipschitz_cap > 0.0) return config.lipschitz_cap;
  if (spec.lipschitz_hint.has_value()) return 10.0 * *spec.lipschitz_hint;
  return 1e3;
}

}  // namespace

RunRecord run_fd_lbfgs(const ProblemSpec& spec, const SolverConfig& config,
                       double fstar) {
  config.validate();

  RunRecord record;
  record.problem = spec.name;
  record.method =
      config.policy.kind == SampleTestKind::Norm ? "fd-norm" : "fd-ipqn";
  record.run_seed = config.run_seed;
  record.fstar = fstar;
  record.status = TerminationStatus::MaxIters;

  EvalCounter counter;
  EvalCache cache;
  const StochasticObjective obj = make_objective(spec, counter, &cache);

  Eigen::VectorXd x = initial_point(spec);
  LbfgsMemory memory(config.memory, config.mode);
  const double lipschitz_cap = derive_lipschitz_cap(spec, config);
  ThetaState theta{config.theta0, config.theta0, config.gamma,
                   config.policy.initial_size};
  std::size_t carried_size = config.policy.initial_size;
  std::uint64_t next_index = 0;

  for (std::uint64_t k = 0; k < config.budgets.max_iters; ++k) {
    if (counter.total() >= config.budgets.max_evals) {
      record.status = TerminationStatus::Budget;
      break;
    }
    const double fvalue = expected_value(spec, x);
    if (!std::isfinite(fvalue)) {
      record.status = TerminationStatus::Diverged;
      break;
    }

    Eigen::VectorXd x_next;
    std::size_t batch_size = carried_size;
    try {
      // Line 1: fresh sample at the carried size; lines 2-11: test and grow.
      const SampleSet set = draw_set(config.run_seed, carried_size, next_index);
      GradientEstimate est = fd_gradient_batch(obj, x, set, config.nu);
      GrowthResult growth = grow_to_least_sufficient(
          config.policy, obj, x, std::move(est), theta.theta, memory,
          config.run_seed, next_index);
      est = std::move(growth.estimate);
      if (growth.verdict == TestVerdict::Stationary) {
        record.status = TerminationStatus::Stationary;
        break;
      }
      batch_size = est.size();

      IterationDiag diag;
      diag.test_theta = theta.theta;
      diag.cap_hit = growth.cap_hit;
      if (est.size() >= 2) {
        // Snapshot of the test's two sides, against the memory it ran with.
        if (config.policy.kind == SampleTestKind::Norm) {
          diag.test_variance = norm_variance(est);
          diag.test_rhs = est.mean.squaredNorm();
        } else {
          diag.test_variance = ipqn_variance(est, memory);
          const double hg = memory.apply_H(est.mean).norm();
          diag.test_rhs = hg * hg * hg * hg;
        }
      }

      // Lines 12-16: threshold controller.
      theta = update_theta(theta, est.size());

      if (counter.total() >= config.budgets.max_evals) {
        record.status = TerminationStatus::Budget;
        break;
      }

      // Lines 17-22: quasi-Newton direction and backtracking step.
      const Eigen::VectorXd direction = -memory.two_loop(est.mean);
      const LineSearchResult ls = backtrack(obj, x, direction, est, config.linesearch);

      if (counter.total() >= config.budgets.max_evals) {
        record.status = TerminationStatus::Budget;
        break;
      }

      // Lines 23-24: curvature pair on the same sample set; the accepted
      // line-search values are the cached FD base points at x_{k+1}.
      const GradientEstimate grad_next =
          fd_gradient_batch(obj, ls.x_next, est.sample, config.nu);
      const Eigen::VectorXd s = ls.x_next - x;
      const Eigen::VectorXd y = grad_next.mean - est.mean;

      // Lines 25-29: conditional store with FIFO eviction.
      const bool accepted =
          memory.try_store(s, y, config.beta1, config.beta2, lipschitz_cap);

      IterationRow row;
      row.iter = k;
      row.evals = counter.total();
      row.fvalue = fvalue;
      row.gap = fvalue - fstar;
      row.batch = est.size();
      row.alpha = ls.alpha;
      row.theta = theta.theta;
      row.pair_accepted = accepted;
      row.test_satisfied = growth.verdict == TestVerdict::Satisfied;
      record.rows.push_back(row);

      diag.sty = y.dot(s);
      diag.s_norm2 = s.squaredNorm();
      diag.y_norm2 = y.squaredNorm();
      diag.dir_dot_g = direction.dot(est.mean);
      diag.condition_waived = ls.condition_waived;
      record.diags.push_back(diag);

      x_next = ls.x_next;
    } catch (const std::runtime_error&) {
      record.status = TerminationStatus::Diverged;
      break;
    } catch (const std::domain_error&) {
      record.status = TerminationStatus::Stationary;
      break;
    }

    x = std::move(x_next);
    obj.clear_cache();
    carried_size = batch_size;  // line 30

    if (config.gap_tolerance > 0.0 &&
        record.rows.back().gap <= config.gap_tolerance) {
      record.status = TerminationStatus::Converged;
      break;
    }
  }

  record.x_final = x;
  return record;
}

// ---------------------------------------------------------------------------
// Stochastic gradient baselines
// ---------------------------------------------------------------------------

namespace {

// Shared fixed-step driver; `estimate` computes the gradient for iteration k.
RunRecord run_fixed_step(
    const ProblemSpec& spec, const std::string& method, double alpha0,
    const Budgets& budgets, std::uint64_t run_seed, double fstar,
    const std::function<Eigen::VectorXd(const StochasticObjective&,
                                        const Eigen::VectorXd&, const SampleSet&,
                                        std::uint64_t)>& estimate,
    std::size_t batch) {
  if (batch < 1) throw std::invalid_argument("baseline batch must be >= 1");

  RunRecord record;
  record.problem = spec.name;
  record.method = method;
  record.run_seed = run_seed;
  record.fstar = fstar;
  record.status = TerminationStatus::MaxIters;

  EvalCounter counter;
  EvalCache cache;
  const StochasticObjective obj = make_objective(spec, counter, &cache);
  Eigen::VectorXd x = initial_point(spec);
  std::uint64_t next_index = 0;

  for (std::uint64_t k = 0; k < budgets.max_iters; ++k) {
    if (counter.total() >= budgets.max_evals) {
      record.status = TerminationStatus::Budget;
      break;
    }
    const double fvalue = expected_value(spec, x);
    if (!std::isfinite(fvalue)) {
      record.status = TerminationStatus::Diverged;
      break;
    }

    Eigen::VectorXd g;
    try {
      const SampleSet set = draw_set(run_seed, batch, next_index);
      g = estimate(obj, x, set, k);
    } catch (const std::runtime_error&) {
      record.status = TerminationStatus::Diverged;
      break;
    }

    IterationRow row;
    row.iter = k;
    row.evals = counter.total();
    row.fvalue = fvalue;
    row.gap = fvalue - fstar;
    row.batch = batch;
    row.alpha = alpha0;
    row.theta = 0.0;
    record.rows.push_back(row);
    record.diags.emplace_back();

    x -= alpha0 * g;
    obj.clear_cache();
  }

  record.x_final = x;
  return record;
}

}  // namespace

RunRecord run_fd_sg(const ProblemSpec& spec, double alpha0, std::size_t batch,
                    double nu, const Budgets& budgets, std::uint64_t run_seed,
                    double fstar) {
  return run_fixed_step(
      spec, "fd-sg", alpha0, budgets, run_seed, fstar,
      [nu](const StochasticObjective& obj, const Eigen::VectorXd& x,
           const SampleSet& set, std::uint64_t) {
        return fd_gradient_batch(obj, x, set, nu).mean;
      },
      batch);
}

RunRecord run_ss_sg(const ProblemSpec& spec, double alpha0, std::size_t batch,
                    double nu, int directions, const Budgets& budgets,
                    std::uint64_t run_seed, double fstar) {
  if (directions < 1) throw std::invalid_argument("ss-sg needs T >= 1 directions");
  return run_fixed_step(
      spec, "ss-sg", alpha0, budgets, run_seed, fstar,
      [nu, directions, run_seed](const StochasticObjective& obj,
                                 const Eigen::VectorXd& x, const SampleSet& set,
                                 std::uint64_t iter) {
        const auto dirs = sphere_directions(run_seed, iter, directions,
                                            static_cast<int>(x.size()));
        return sphere_smoothing_gradient(obj, x, set, nu, dirs);
      },
      batch);
}

// ---------------------------------------------------------------------------
// Baseline tuning
// ---------------------------------------------------------------------------

namespace {

// Minimal pool: tasks pulled by index, results stored by index, so the
// outcome is independent of scheduling.
void run_indexed_tasks(std::size_t count, int workers,
                       const std::function<void(std::size_t)>& task) {
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        task(i);
      }
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace

TuneResult tune_baseline(const ProblemSpec& spec, BaselineMethod method,
                         const std::vector<int>& exponents,
                         const std::vector<std::uint64_t>& seeds,
                         const Budgets& budgets, double fstar, std::size_t batch,
                         double nu, int directions, int workers) {
  if (exponents.empty()) throw std::invalid_argument("tune_baseline: empty grid");
  if (seeds.empty()) throw std::invalid_argument("tune_baseline: no seeds");

  const std::size_t total = exponents.size() * seeds.size();
  std::vector<RunRecord> records(total);
  run_indexed_tasks(total, workers, [&](std::size_t i) {
    const int j = exponents[i / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    const double alpha0 = std::ldexp(1.0, j);
    records[i] = method == BaselineMethod::FdSg
                     ? run_fd_sg(spec, alpha0, batch, nu, budgets, seed, fstar)
                     : run_ss_sg(spec, alpha0, batch, nu, directions, budgets,
                                 seed, fstar);
  });

  TuneResult result;
  double best = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (std::size_t e = 0; e < exponents.size(); ++e) {
    double sum = 0.0;
    bool valid = true;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const RunRecord& rec = records[e * seeds.size() + s];
      const double gap = rec.rows.empty()
                             ? std::numeric_limits<double>::infinity()
                             : rec.final_gap();
      if (!std::isfinite(gap)) {
        valid = false;
        break;
      }
      sum += gap;
    }
    const double mean =
        valid ? sum / static_cast<double>(seeds.size())
              : std::numeric_limits<double>::infinity();
    // Strict comparison in ascending exponent order: ties go to smaller j.
    if (!have_best || mean < best) {
      best = mean;
      have_best = true;
      result.best_exponent = exponents[e];
      result.best_alpha0 = std::ldexp(1.0, exponents[e]);
      result.best_mean_final_gap = mean;
      result.best_records.assign(
          records.begin() + static_cast<std::ptrdiff_t>(e * seeds.size()),
          records.begin() + static_cast<std::ptrdiff_t>((e + 1) * seeds.size()));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reference optimum
// ---------------------------------------------------------------------------

ReferenceOptimum compute_reference_optimum(const ProblemSpec& spec) {
  ReferenceOptimum ref;
  if (spec.noise == NoiseModel::UniformL1) {
    // Closed form: at any x with A x = b the expectation equals p/2.
    ref.fstar = static_cast<double>(spec.p) / 2.0;
    ref.x_ref = spec.nonsmooth->x_star;
    ref.tolerance_met = true;
    ref.evals = 0;
    return ref;
  }

  constexpr double kGradTol = 1e-10;
  constexpr std::uint64_t kMaxEvals = 2000;

  std::uint64_t evals = 0;
  auto value = [&](const Eigen::VectorXd& x) {
    ++evals;
    return expected_value(spec, x);
  };

  Eigen::VectorXd x = initial_point(spec);
  double f = value(x);
  Eigen::VectorXd g = expected_gradient(spec, x);
  LbfgsMemory memory(10, CurvatureMode::Smooth);

  while (g.lpNorm<Eigen::Infinity>() > kGradTol && evals < kMaxEvals) {
    Eigen::VectorXd p = -memory.two_loop(g);
    if (!(p.dot(g) < 0.0)) {
      memory.clear();
      p = -g;
    }
    // Armijo backtracking on the noise-free function; any strict decrease is
    // accepted once the slope margin proves unreachable.
    double alpha = 1.0;
    double f_trial = value(x + alpha * p);
    int backtracks = 0;
    while ((!std::isfinite(f_trial) ||
            f_trial > f + 1e-4 * alpha * p.dot(g)) &&
           backtracks < 640 && evals < kMaxEvals) {
      alpha *= 0.5;
      f_trial = value(x + alpha * p);
      ++backtracks;
    }
    if (!std::isfinite(f_trial) || f_trial >= f) break;  // no usable progress

    const Eigen::VectorXd x_next = x + alpha * p;
    const Eigen::VectorXd g_next = expected_gradient(spec, x_next);
    memory.try_store(x_next - x, g_next - g, 1e-12, 0.0, 0.0);
    x = x_next;
    f = f_trial;
    g = g_next;
  }

  ref.fstar = f;
  ref.x_ref = x;
  ref.tolerance_met = g.lpNorm<Eigen::Infinity>() <= kGradTol;
  ref.evals = evals;
  return ref;
}

}  // namespace zoqn
