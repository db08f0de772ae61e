#include "zoqn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace zoqn {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// Residual maps. Formulas are transcribed from the standard nonlinear
// least-squares collections; see core/docs/problems.md for the exact
// statements and data sources. Each Jacobian is verified against central
// differences in the test suite.
// ---------------------------------------------------------------------------

// Chebyquad: f_i(x) = (1/d) sum_j T*_i(x_j) - int_0^1 T*_i(t) dt, where T*_i
// is the i-th Chebyshev polynomial shifted to [0, 1].
Eigen::VectorXd chebyquad_residuals(int p, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < d; ++j) {
    const double u = 2.0 * x(j) - 1.0;
    double t_prev = 1.0, t_cur = u;
    for (int i = 1; i <= p; ++i) {
      f(i - 1) += t_cur / d;
      const double t_next = 2.0 * u * t_cur - t_prev;
      t_prev = t_cur;
      t_cur = t_next;
    }
  }
  for (int i = 1; i <= p; ++i) {
    if (i % 2 == 0) f(i - 1) += 1.0 / (static_cast<double>(i) * i - 1.0);
  }
  return f;
}

Eigen::MatrixXd chebyquad_jacobian(int p, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, d);
  for (int j = 0; j < d; ++j) {
    const double u = 2.0 * x(j) - 1.0;
    double t_prev = 1.0, t_cur = u;
    double dt_prev = 0.0, dt_cur = 2.0;  // d/dx with u = 2x - 1
    for (int i = 1; i <= p; ++i) {
      J(i - 1, j) = dt_cur / d;
      const double t_next = 2.0 * u * t_cur - t_prev;
      const double dt_next = 4.0 * t_cur + 2.0 * u * dt_cur - dt_prev;
      t_prev = t_cur;
      t_cur = t_next;
      dt_prev = dt_cur;
      dt_cur = dt_next;
    }
  }
  return J;
}

// Osborne 2: y_i - (x1 e^{-t x5} + x2 e^{-(t-x9)^2 x6}
//                 + x3 e^{-(t-x10)^2 x7} + x4 e^{-(t-x11)^2 x8}), t_i = i/10.
constexpr double kOsborne2Data[65] = {
    1.366, 1.191, 1.112, 1.013, 0.991, 0.885, 0.831, 0.847, 0.786, 0.725,
    0.746, 0.679, 0.608, 0.655, 0.616, 0.606, 0.602, 0.626, 0.651, 0.724,
    0.649, 0.649, 0.694, 0.644, 0.624, 0.661, 0.612, 0.558, 0.533, 0.495,
    0.500, 0.423, 0.395, 0.375, 0.372, 0.391, 0.396, 0.405, 0.428, 0.429,
    0.523, 0.562, 0.607, 0.653, 0.672, 0.708, 0.633, 0.668, 0.645, 0.632,
    0.591, 0.559, 0.597, 0.625, 0.739, 0.710, 0.729, 0.720, 0.636, 0.581,
    0.428, 0.292, 0.162, 0.098, 0.054};

Eigen::VectorXd osborne2_residuals(const Eigen::VectorXd& x) {
  Eigen::VectorXd f(65);
  for (int i = 0; i < 65; ++i) {
    const double t = static_cast<double>(i) / 10.0;
    const double m = x(0) * std::exp(-t * x(4)) +
                     x(1) * std::exp(-(t - x(8)) * (t - x(8)) * x(5)) +
                     x(2) * std::exp(-(t - x(9)) * (t - x(9)) * x(6)) +
                     x(3) * std::exp(-(t - x(10)) * (t - x(10)) * x(7));
    f(i) = kOsborne2Data[i] - m;
  }
  return f;
}

Eigen::MatrixXd osborne2_jacobian(const Eigen::VectorXd& x) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(65, 11);
  for (int i = 0; i < 65; ++i) {
    const double t = static_cast<double>(i) / 10.0;
    const double e1 = std::exp(-t * x(4));
    const double r2 = t - x(8), r3 = t - x(9), r4 = t - x(10);
    const double e2 = std::exp(-r2 * r2 * x(5));
    const double e3 = std::exp(-r3 * r3 * x(6));
    const double e4 = std::exp(-r4 * r4 * x(7));
    J(i, 0) = -e1;
    J(i, 1) = -e2;
    J(i, 2) = -e3;
    J(i, 3) = -e4;
    J(i, 4) = x(0) * t * e1;
    J(i, 5) = x(1) * r2 * r2 * e2;
    J(i, 6) = x(2) * r3 * r3 * e3;
    J(i, 7) = x(3) * r4 * r4 * e4;
    J(i, 8) = -2.0 * x(1) * x(5) * r2 * e2;
    J(i, 9) = -2.0 * x(2) * x(6) * r3 * e3;
    J(i, 10) = -2.0 * x(3) * x(7) * r4 * e4;
  }
  return J;
}

// Bdqrtic: for i = 0..d-5, a linear group (-4 x_i + 3) followed by a block of
// quartic groups (x_i^2 + 2 x_{i+1}^2 + 3 x_{i+2}^2 + 4 x_{i+3}^2 + 5 x_{d-1}^2).
Eigen::VectorXd bdqrtic_residuals(const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  const int g = d - 4;
  Eigen::VectorXd f(2 * g);
  for (int i = 0; i < g; ++i) {
    f(i) = -4.0 * x(i) + 3.0;
    f(g + i) = x(i) * x(i) + 2.0 * x(i + 1) * x(i + 1) +
               3.0 * x(i + 2) * x(i + 2) + 4.0 * x(i + 3) * x(i + 3) +
               5.0 * x(d - 1) * x(d - 1);
  }
  return f;
}

Eigen::MatrixXd bdqrtic_jacobian(const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  const int g = d - 4;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * g, d);
  for (int i = 0; i < g; ++i) {
    J(i, i) = -4.0;
    J(g + i, i) += 2.0 * x(i);
    J(g + i, i + 1) += 4.0 * x(i + 1);
    J(g + i, i + 2) += 6.0 * x(i + 2);
    J(g + i, i + 3) += 8.0 * x(i + 3);
    J(g + i, d - 1) += 10.0 * x(d - 1);
  }
  return J;
}

// Cube chain with p >= d residuals: the first residual is x_0 - 1 and
// residual r > 0 is the chain link 10 (x_{j+1} - x_j^3) with
// j = (r - 1) mod (d - 1), so links repeat from the front once the chain is
// exhausted. All residuals vanish at the all-ones point.
Eigen::VectorXd cube_residuals(int p, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd f(p);
  f(0) = x(0) - 1.0;
  for (int r = 1; r < p; ++r) {
    const int j = (r - 1) % (d - 1);
    f(r) = 10.0 * (x(j + 1) - x(j) * x(j) * x(j));
  }
  return f;
}

Eigen::MatrixXd cube_jacobian(int p, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, d);
  J(0, 0) = 1.0;
  for (int r = 1; r < p; ++r) {
    const int j = (r - 1) % (d - 1);
    J(r, j + 1) += 10.0;
    J(r, j) += -30.0 * x(j) * x(j);
  }
  return J;
}

// Heart8ls: least-squares form of the 8-dimensional heart dipole system.
// Variables x = (a, b, c, d, t, u, v, w).
constexpr double kHeartSums[8] = {-0.69, -0.044, -1.57, -1.31,
                                  -2.65, 2.0,    -12.6, 9.48};

Eigen::VectorXd heart8ls_residuals(const Eigen::VectorXd& x) {
  const double a = x(0), b = x(1), c = x(2), d = x(3);
  const double t = x(4), u = x(5), v = x(6), w = x(7);
  Eigen::VectorXd f(8);
  f(0) = a + b - kHeartSums[0];
  f(1) = c + d - kHeartSums[1];
  f(2) = t * a + u * b - v * c - w * d - kHeartSums[2];
  f(3) = v * a + w * b + t * c + u * d - kHeartSums[3];
  f(4) = a * (t * t - v * v) - 2.0 * c * t * v + b * (u * u - w * w) -
         2.0 * d * u * w - kHeartSums[4];
  f(5) = c * (t * t - v * v) + 2.0 * a * t * v + d * (u * u - w * w) +
         2.0 * b * u * w - kHeartSums[5];
  f(6) = a * t * (t * t - 3.0 * v * v) + c * v * (v * v - 3.0 * t * t) +
         b * u * (u * u - 3.0 * w * w) + d * w * (w * w - 3.0 * u * u) -
         kHeartSums[6];
  f(7) = c * t * (t * t - 3.0 * v * v) - a * v * (v * v - 3.0 * t * t) +
         d * u * (u * u - 3.0 * w * w) - b * w * (w * w - 3.0 * u * u) -
         kHeartSums[7];
  return f;
}

Eigen::MatrixXd heart8ls_jacobian(const Eigen::VectorXd& x) {
  const double a = x(0), b = x(1), c = x(2), d = x(3);
  const double t = x(4), u = x(5), v = x(6), w = x(7);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(8, 8);
  J(0, 0) = 1.0;
  J(0, 1) = 1.0;
  J(1, 2) = 1.0;
  J(1, 3) = 1.0;

  J(2, 0) = t; J(2, 1) = u; J(2, 2) = -v; J(2, 3) = -w;
  J(2, 4) = a; J(2, 5) = b; J(2, 6) = -c; J(2, 7) = -d;

  J(3, 0) = v; J(3, 1) = w; J(3, 2) = t; J(3, 3) = u;
  J(3, 4) = c; J(3, 5) = d; J(3, 6) = a; J(3, 7) = b;

  J(4, 0) = t * t - v * v;
  J(4, 1) = u * u - w * w;
  J(4, 2) = -2.0 * t * v;
  J(4, 3) = -2.0 * u * w;
  J(4, 4) = 2.0 * a * t - 2.0 * c * v;
  J(4, 5) = 2.0 * b * u - 2.0 * d * w;
  J(4, 6) = -2.0 * a * v - 2.0 * c * t;
  J(4, 7) = -2.0 * b * w - 2.0 * d * u;

  J(5, 0) = 2.0 * t * v;
  J(5, 1) = 2.0 * u * w;
  J(5, 2) = t * t - v * v;
  J(5, 3) = u * u - w * w;
  J(5, 4) = 2.0 * c * t + 2.0 * a * v;
  J(5, 5) = 2.0 * d * u + 2.0 * b * w;
  J(5, 6) = -2.0 * c * v + 2.0 * a * t;
  J(5, 7) = -2.0 * d * w + 2.0 * b * u;

  J(6, 0) = t * (t * t - 3.0 * v * v);
  J(6, 1) = u * (u * u - 3.0 * w * w);
  J(6, 2) = v * (v * v - 3.0 * t * t);
  J(6, 3) = w * (w * w - 3.0 * u * u);
  J(6, 4) = 3.0 * a * (t * t - v * v) - 6.0 * c * v * t;
  J(6, 5) = 3.0 * b * (u * u - w * w) - 6.0 * d * w * u;
  J(6, 6) = 3.0 * c * (v * v - t * t) - 6.0 * a * t * v;
  J(6, 7) = 3.0 * d * (w * w - u * u) - 6.0 * b * u * w;

  J(7, 0) = -v * (v * v - 3.0 * t * t);
  J(7, 1) = -w * (w * w - 3.0 * u * u);
  J(7, 2) = t * (t * t - 3.0 * v * v);
  J(7, 3) = u * (u * u - 3.0 * w * w);
  J(7, 4) = 3.0 * c * (t * t - v * v) + 6.0 * a * v * t;
  J(7, 5) = 3.0 * d * (u * u - w * w) + 6.0 * b * w * u;
  J(7, 6) = -6.0 * c * t * v - 3.0 * a * (v * v - t * t);
  J(7, 7) = -6.0 * d * u * w - 3.0 * b * (w * w - u * u);
  return J;
}

Eigen::VectorXd linspace_start(int d) {
  Eigen::VectorXd x(d);
  for (int j = 0; j < d; ++j) x(j) = static_cast<double>(j + 1) / (d + 1);
  return x;
}

Eigen::VectorXd alternating_start(int d, double odd, double even) {
  Eigen::VectorXd x(d);
  for (int j = 0; j < d; ++j) x(j) = (j % 2 == 0) ? odd : even;
  return x;
}

std::map<std::string, ProblemDefinition, std::less<>>& registry() {
  static std::map<std::string, ProblemDefinition, std::less<>> reg = [] {
    std::map<std::string, ProblemDefinition, std::less<>> r;
    r["chebyquad"] = ProblemDefinition{
        30, 45,
        [](const Eigen::VectorXd& x) { return chebyquad_residuals(45, x); },
        [](const Eigen::VectorXd& x) { return chebyquad_jacobian(45, x); },
        linspace_start(30)};
    r["osborne"] = ProblemDefinition{
        11, 65, [](const Eigen::VectorXd& x) { return osborne2_residuals(x); },
        [](const Eigen::VectorXd& x) { return osborne2_jacobian(x); },
        (Eigen::VectorXd(11) << 1.3, 0.65, 0.65, 0.7, 0.6, 3.0, 5.0, 7.0, 2.0,
         4.5, 5.5)
            .finished()};
    r["bdqrtic"] = ProblemDefinition{
        50, 92, [](const Eigen::VectorXd& x) { return bdqrtic_residuals(x); },
        [](const Eigen::VectorXd& x) { return bdqrtic_jacobian(x); },
        Eigen::VectorXd::Ones(50)};
    r["cube"] = ProblemDefinition{
        20, 30, [](const Eigen::VectorXd& x) { return cube_residuals(30, x); },
        [](const Eigen::VectorXd& x) { return cube_jacobian(30, x); },
        alternating_start(20, -1.2, 1.0)};
    r["heart8ls"] = ProblemDefinition{
        8, 8, [](const Eigen::VectorXd& x) { return heart8ls_residuals(x); },
        [](const Eigen::VectorXd& x) { return heart8ls_jacobian(x); },
        (Eigen::VectorXd(8) << -0.3, -0.39, 0.3, -0.344, -1.2, 2.69, 1.59,
         -1.5)
            .finished()};
    return r;
  }();
  return reg;
}

double l1_expected_piece(double c) {
  return std::abs(c) <= 1.0 ? 0.5 * (c * c + 1.0) : std::abs(c);
}

}  // namespace

const ProblemDefinition& problem_definition(std::string_view name) {
  auto it = registry().find(name);
  if (it == registry().end()) {
    throw std::invalid_argument("unknown problem: " + std::string(name));
  }
  return it->second;
}

void register_problem(std::string name, ProblemDefinition def) {
  registry()[std::move(name)] = std::move(def);
}

bool is_registered_problem(std::string_view name) {
  return registry().find(name) != registry().end();
}

Eigen::VectorXd residuals(std::string_view name, const Eigen::VectorXd& x) {
  const auto& def = problem_definition(name);
  require(x.size() == def.d, "residuals: wrong input dimension");
  return def.residuals(x);
}

Eigen::MatrixXd residual_jacobian(std::string_view name, const Eigen::VectorXd& x) {
  const auto& def = problem_definition(name);
  require(x.size() == def.d, "residual_jacobian: wrong input dimension");
  return def.jacobian(x);
}

// ---------------------------------------------------------------------------
// EvalCache
// ---------------------------------------------------------------------------

const EvalCache::Slot* EvalCache::find_slot(const Eigen::VectorXd& x) const {
  for (const auto& s : slots_) {
    if (s.x.size() == x.size() && s.x == x) return &s;
  }
  return nullptr;
}

EvalCache::Slot* EvalCache::find_slot(const Eigen::VectorXd& x) {
  for (auto& s : slots_) {
    if (s.x.size() == x.size() && s.x == x) return &s;
  }
  return nullptr;
}

std::optional<double> EvalCache::lookup(const Eigen::VectorXd& x, SampleId id) const {
  const Slot* slot = find_slot(x);
  if (slot == nullptr) return std::nullopt;
  auto it = std::lower_bound(slot->by_index.begin(), slot->by_index.end(),
                             id.index, [](const auto& e, std::uint64_t idx) {
                               return e.first < idx;
                             });
  if (it != slot->by_index.end() && it->first == id.index) return it->second;
  return std::nullopt;
}

void EvalCache::store(const Eigen::VectorXd& x, SampleId id, double value) {
  Slot* slot = find_slot(x);
  if (slot == nullptr) {
    slots_.push_back(Slot{x, {}});
    slot = &slots_.back();
  }
  auto it = std::lower_bound(slot->by_index.begin(), slot->by_index.end(),
                             id.index, [](const auto& e, std::uint64_t idx) {
                               return e.first < idx;
                             });
  if (it != slot->by_index.end() && it->first == id.index) {
    it->second = value;
  } else {
    slot->by_index.insert(it, {id.index, value});
  }
}

void EvalCache::clear() { slots_.clear(); }

std::size_t EvalCache::size() const {
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.by_index.size();
  return n;
}

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

double noisy_value(const Eigen::VectorXd& phi, NoiseModel noise, double sigma,
                   const Eigen::VectorXd& zeta) {
  require(phi.size() == zeta.size(), "noisy_value: phi/zeta dimension mismatch");
  switch (noise) {
    case NoiseModel::Abs: {
      double s = 0.0;
      for (Eigen::Index j = 0; j < phi.size(); ++j) {
        const double t = phi(j) + zeta(j);
        s += t * t - sigma * sigma;
      }
      return s;
    }
    case NoiseModel::Rel: {
      double s = 0.0;
      for (Eigen::Index j = 0; j < phi.size(); ++j) {
        const double t = 1.0 + zeta(j);
        s += phi(j) * phi(j) * t * t;
      }
      return s / (1.0 + sigma * sigma);
    }
    case NoiseModel::UniformL1: {
      double s = 0.0;
      for (Eigen::Index j = 0; j < phi.size(); ++j) s += std::abs(phi(j) - zeta(j));
      return s;
    }
  }
  throw std::logic_error("noisy_value: unreachable");
}

namespace {

Eigen::VectorXd spec_residuals(const ProblemSpec& spec, const Eigen::VectorXd& x) {
  require(x.size() == spec.d, "stochastic_value: wrong input dimension");
  if (spec.noise == NoiseModel::UniformL1) {
    return spec.nonsmooth->A * x - spec.nonsmooth->b;
  }
  return residuals(spec.name, x);
}

double evaluate_raw(const ProblemSpec& spec, const Eigen::VectorXd& x, SampleId id) {
  const Eigen::VectorXd phi = spec_residuals(spec, x);
  const NoiseDistribution dist = spec.noise == NoiseModel::UniformL1
                                     ? NoiseDistribution::UniformSym
                                     : NoiseDistribution::Gaussian;
  const Eigen::VectorXd zeta = realize_noise(id, spec.p, dist, spec.sigma);
  return noisy_value(phi, spec.noise, spec.sigma, zeta);
}

}  // namespace

double stochastic_value(const ProblemSpec& spec, const Eigen::VectorXd& x,
                        SampleId id, EvalCounter& counter, EvalCache* cache) {
  if (cache != nullptr) {
    if (auto hit = cache->lookup(x, id)) return *hit;
  }
  const double v = evaluate_raw(spec, x, id);
  counter.increment();
  return v;
}

double expected_value(const ProblemSpec& spec, const Eigen::VectorXd& x) {
  const Eigen::VectorXd phi = spec_residuals(spec, x);
  if (spec.noise == NoiseModel::UniformL1) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < phi.size(); ++i) s += l1_expected_piece(phi(i));
    return s;
  }
  // Same term order as noisy_value so the sigma -> 0 limit is exact.
  double s = 0.0;
  for (Eigen::Index j = 0; j < phi.size(); ++j) s += phi(j) * phi(j);
  return s;
}

Eigen::VectorXd expected_gradient(const ProblemSpec& spec, const Eigen::VectorXd& x) {
  if (spec.noise == NoiseModel::UniformL1) return expected_gradient_nonsmooth(spec, x);
  require(x.size() == spec.d, "expected_gradient: wrong input dimension");
  const Eigen::VectorXd phi = residuals(spec.name, x);
  const Eigen::MatrixXd J = residual_jacobian(spec.name, x);
  return 2.0 * J.transpose() * phi;
}

Eigen::VectorXd expected_gradient_nonsmooth(const ProblemSpec& spec,
                                            const Eigen::VectorXd& x) {
  require(spec.noise == NoiseModel::UniformL1 && spec.nonsmooth.has_value(),
          "expected_gradient_nonsmooth: not an l1 problem");
  require(x.size() == spec.d, "expected_gradient_nonsmooth: wrong input dimension");
  const Eigen::VectorXd c = spec.nonsmooth->A * x - spec.nonsmooth->b;
  Eigen::VectorXd w(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    w(i) = std::abs(c(i)) <= 1.0 ? c(i) : (c(i) > 0.0 ? 1.0 : -1.0);
  }
  return spec.nonsmooth->A.transpose() * w;
}

Eigen::MatrixXd expected_hessian_nonsmooth(const ProblemSpec& spec,
                                           const Eigen::VectorXd& x) {
  require(spec.noise == NoiseModel::UniformL1 && spec.nonsmooth.has_value(),
          "expected_hessian_nonsmooth: not an l1 problem");
  require(x.size() == spec.d, "expected_hessian_nonsmooth: wrong input dimension");
  const Eigen::MatrixXd& A = spec.nonsmooth->A;
  const Eigen::VectorXd c = A * x - spec.nonsmooth->b;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(spec.d, spec.d);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (std::abs(c(i)) == 1.0) {
      throw std::domain_error(
          "expected_hessian_nonsmooth: kink boundary |a_i^T x - b_i| == 1");
    }
    if (std::abs(c(i)) < 1.0) {
      H.noalias() += A.row(i).transpose() * A.row(i);
    }
  }
  return H;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

namespace {
// Domain tags keep instance construction streams disjoint from sample noise.
constexpr std::uint64_t kTagMatrix = 0x6d61747269780000ULL;
constexpr std::uint64_t kTagStar = 0x73746172'00000000ULL;
constexpr std::uint64_t kTagStart = 0x7830'000000000000ULL;
}  // namespace

ProblemSpec make_nonsmooth_instance(std::uint64_t run_seed, int d, int p) {
  require(d == p && d >= 1, "make_nonsmooth_instance: requires d == p >= 1");
  Eigen::MatrixXd G(p, d);
  for (int i = 0; i < p; ++i) {
    G.row(i) = realize_noise(SampleId{mix64(run_seed ^ kTagMatrix),
                                      static_cast<std::uint64_t>(i)},
                             d, NoiseDistribution::Gaussian, 1.0);
  }
  NonsmoothData data;
  data.A = 0.5 * (G + G.transpose());
  data.x_star = realize_noise(SampleId{mix64(run_seed ^ kTagStar), 0}, d,
                              NoiseDistribution::Gaussian, 1.0);
  data.b = data.A * data.x_star;

  ProblemSpec spec;
  spec.name = "l1rand";
  spec.d = d;
  spec.p = p;
  spec.noise = NoiseModel::UniformL1;
  spec.sigma = 0.0;
  spec.x0 = realize_noise(SampleId{mix64(run_seed ^ kTagStart), 0}, d,
                          NoiseDistribution::Gaussian, 1.0);
  // Largest Hessian eigenvalue of the expectation is bounded by that of A^T A.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(data.A.transpose() * data.A);
  spec.lipschitz_hint = eig.eigenvalues().maxCoeff();
  spec.nonsmooth = std::move(data);
  return spec;
}

ProblemSpec make_problem(std::string_view name, NoiseModel noise, double sigma) {
  require(noise != NoiseModel::UniformL1,
          "make_problem: use make_nonsmooth_instance for the l1 problem");
  require(sigma > 0.0, "make_problem: sigma must be positive");
  const auto& def = problem_definition(name);
  ProblemSpec spec;
  spec.name = std::string(name);
  spec.d = def.d;
  spec.p = def.p;
  spec.noise = noise;
  spec.sigma = sigma;
  spec.x0 = 10.0 * def.standard_start;
  return spec;
}

Eigen::VectorXd initial_point(const ProblemSpec& spec) { return spec.x0; }

const std::vector<std::string>& benchmark_problem_names() {
  static const std::vector<std::string> names = {
      "chebyquad", "osborne", "bdqrtic", "cube", "heart8ls", "l1rand"};
  return names;
}

// ---------------------------------------------------------------------------
// StochasticObjective
// ---------------------------------------------------------------------------

double StochasticObjective::value(const Eigen::VectorXd& x, SampleId id) const {
  if (cache_ != nullptr) {
    if (auto hit = cache_->lookup(x, id)) return *hit;
  }
  const double v = fn_(x, id);
  counter_->increment();
  return v;
}

double StochasticObjective::value_cached(const Eigen::VectorXd& x, SampleId id) const {
  if (cache_ != nullptr) {
    if (auto hit = cache_->lookup(x, id)) return *hit;
    const double v = fn_(x, id);
    counter_->increment();
    cache_->store(x, id, v);
    return v;
  }
  const double v = fn_(x, id);
  counter_->increment();
  return v;
}

void StochasticObjective::clear_cache() const {
  if (cache_ != nullptr) cache_->clear();
}

StochasticObjective make_objective(const ProblemSpec& spec, EvalCounter& counter,
                                   EvalCache* cache) {
  return StochasticObjective(
      [&spec](const Eigen::VectorXd& x, SampleId id) {
        return evaluate_raw(spec, x, id);
      },
      counter, cache);
}

}  // namespace zoqn
