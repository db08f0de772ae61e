#include "zoqn/gradients.hpp"

#include <cmath>
#include <stdexcept>

namespace zoqn {

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::runtime_error(std::string("evaluation failure: non-finite ") + what);
  }
}

double pairwise_sum_range(std::span<const double> v, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  if (n <= 4) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + n / 2;
  return pairwise_sum_range(v, lo, mid) + pairwise_sum_range(v, mid, hi);
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
  return pairwise_sum_range(v, 0, v.size());
}

double pairwise_mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("pairwise_mean: empty range");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

Eigen::VectorXd pairwise_mean(const std::vector<Eigen::VectorXd>& v) {
  if (v.empty()) throw std::invalid_argument("pairwise_mean: empty range");
  const Eigen::Index d = v.front().size();
  Eigen::VectorXd out(d);
  std::vector<double> comp(v.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < v.size(); ++i) comp[i] = v[i](j);
    out(j) = pairwise_mean(comp);
  }
  return out;
}

double GradientEstimate::base_mean() const { return pairwise_mean(base_values); }

namespace {

// Shared worker: per-sample FD gradient with the base value returned so the
// batch estimator can retain it.
Eigen::VectorXd fd_single_impl(const StochasticObjective& obj,
                               const Eigen::VectorXd& x, SampleId id, double nu,
                               double* base_out) {
  if (!(nu > 0.0)) throw std::invalid_argument("fd gradient: nu must be positive");
  const double f0 = obj.value_cached(x, id);
  check_finite(f0, "base value");
  const Eigen::Index d = x.size();
  Eigen::VectorXd g(d);
  Eigen::VectorXd shifted = x;
  for (Eigen::Index j = 0; j < d; ++j) {
    shifted(j) = x(j) + nu;
    const double fj = obj.value(shifted, id);
    check_finite(fj, "shifted value");
    g(j) = (fj - f0) / nu;
    shifted(j) = x(j);
  }
  if (base_out != nullptr) *base_out = f0;
  return g;
}

}  // namespace

Eigen::VectorXd fd_gradient_single(const StochasticObjective& obj,
                                   const Eigen::VectorXd& x, SampleId id,
                                   double nu) {
  return fd_single_impl(obj, x, id, nu, nullptr);
}

Eigen::VectorXd fd_gradient_single(const ProblemSpec& spec, const Eigen::VectorXd& x,
                                   SampleId id, double nu, EvalCounter& counter,
                                   EvalCache* cache) {
  return fd_gradient_single(make_objective(spec, counter, cache), x, id, nu);
}

GradientEstimate fd_gradient_batch(const StochasticObjective& obj,
                                   const Eigen::VectorXd& x, const SampleSet& set,
                                   double nu) {
  if (set.empty()) throw std::invalid_argument("fd_gradient_batch: empty sample set");
  GradientEstimate est;
  est.nu = nu;
  est.sample = set;
  est.per_sample.reserve(set.size());
  est.base_values.reserve(set.size());
  for (const SampleId& id : set.ids) {
    double base = 0.0;
    est.per_sample.push_back(fd_single_impl(obj, x, id, nu, &base));
    est.base_values.push_back(base);
  }
  est.mean = pairwise_mean(est.per_sample);
  return est;
}

GradientEstimate fd_gradient_batch(const ProblemSpec& spec, const Eigen::VectorXd& x,
                                   const SampleSet& set, double nu,
                                   EvalCounter& counter, EvalCache* cache) {
  return fd_gradient_batch(make_objective(spec, counter, cache), x, set, nu);
}

void extend_estimate(const StochasticObjective& obj, const Eigen::VectorXd& x,
                     GradientEstimate& est, std::span<const SampleId> new_ids) {
  for (const SampleId& id : new_ids) {
    double base = 0.0;
    est.per_sample.push_back(fd_single_impl(obj, x, id, est.nu, &base));
    est.base_values.push_back(base);
    est.sample.ids.push_back(id);
  }
  est.mean = pairwise_mean(est.per_sample);
}

Eigen::VectorXd fd_gradient_deterministic(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("fd gradient: nu must be positive");
  const double f0 = f(x);
  const Eigen::Index d = x.size();
  Eigen::VectorXd g(d);
  Eigen::VectorXd shifted = x;
  for (Eigen::Index j = 0; j < d; ++j) {
    shifted(j) = x(j) + nu;
    g(j) = (f(shifted) - f0) / nu;
    shifted(j) = x(j);
  }
  return g;
}

double norm_variance(const GradientEstimate& est) {
  const std::size_t n = est.size();
  if (n < 2) {
    throw std::invalid_argument("norm_variance: needs at least two samples");
  }
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = (est.per_sample[i] - est.mean).squaredNorm();
  }
  return pairwise_sum(sq) / static_cast<double>(n - 1);
}

double ipqn_variance(const GradientEstimate& est, const LbfgsMemory& memory) {
  const std::size_t n = est.size();
  if (n < 2) {
    throw std::invalid_argument("ipqn_variance: needs at least two samples");
  }
  const Eigen::VectorXd w = memory.apply_H(est.mean);
  const Eigen::VectorXd z = memory.apply_H(w);  // H symmetric: (H g_i)^T w = g_i^T z
  const double w_norm2 = w.squaredNorm();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = est.per_sample[i].dot(z) - w_norm2;
    sq[i] = t * t;
  }
  return pairwise_sum(sq) / static_cast<double>(n - 1);
}

std::vector<Eigen::VectorXd> sphere_directions(std::uint64_t run_seed,
                                               std::uint64_t draw_index, int count,
                                               int dim) {
  if (count < 1) throw std::invalid_argument("sphere_directions: count must be >= 1");
  // Separate stream domain from sample noise; normalized gaussians are
  // uniform on the sphere.
  const std::uint64_t seed = mix64(run_seed ^ 0x7370686572650000ULL);
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(count);
  for (int j = 0; j < count; ++j) {
    const SampleId id{seed, draw_index * static_cast<std::uint64_t>(count) +
                                static_cast<std::uint64_t>(j)};
    Eigen::VectorXd u = realize_noise(id, dim, NoiseDistribution::Gaussian, 1.0);
    const double norm = u.norm();
    if (norm == 0.0) {
      u.setZero();
      u(0) = 1.0;  // unreachable in practice
    } else {
      u /= norm;
    }
    dirs.push_back(std::move(u));
  }
  return dirs;
}

Eigen::VectorXd sphere_smoothing_gradient(const StochasticObjective& obj,
                                          const Eigen::VectorXd& x,
                                          const SampleSet& set, double nu,
                                          std::span<const Eigen::VectorXd> directions) {
  if (set.empty()) {
    throw std::invalid_argument("sphere_smoothing_gradient: empty sample set");
  }
  if (directions.empty()) {
    throw std::invalid_argument("sphere_smoothing_gradient: needs T >= 1 directions");
  }
  if (!(nu > 0.0)) throw std::invalid_argument("fd gradient: nu must be positive");
  const double d_over_t = static_cast<double>(x.size()) /
                          static_cast<double>(directions.size());
  std::vector<Eigen::VectorXd> per_sample;
  per_sample.reserve(set.size());
  for (const SampleId& id : set.ids) {
    const double f0 = obj.value_cached(x, id);
    check_finite(f0, "base value");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (const Eigen::VectorXd& u : directions) {
      const double fu = obj.value(x + nu * u, id);
      check_finite(fu, "shifted value");
      g.noalias() += ((fu - f0) / nu) * u;
    }
    per_sample.push_back(d_over_t * g);
  }
  return pairwise_mean(per_sample);
}

double optimal_fd_parameter(double eps_machine, double lipschitz,
                            SmoothnessMode mode, double kappa) {
  if (!(eps_machine > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("optimal_fd_parameter: inputs must be positive");
  }
  if (mode == SmoothnessMode::Smooth) {
    return 2.0 * std::sqrt(eps_machine / lipschitz);
  }
  if (kappa < 0.0) {
    throw std::invalid_argument("optimal_fd_parameter: kappa must be nonnegative");
  }
  return 2.0 * std::sqrt(eps_machine / (lipschitz * (1.0 + kappa)));
}

}  // namespace zoqn
