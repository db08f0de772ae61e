#include "zoqn/lbfgs.hpp"

#include <cassert>
#include <stdexcept>
#include <vector>

namespace zoqn {

bool LbfgsMemory::try_store(const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                            double beta1, double beta2, double lipschitz_cap) {
  if (s.size() == 0 || y.size() == 0 || s.size() != y.size()) {
    throw std::invalid_argument("LbfgsMemory::try_store: bad vector lengths");
  }
  const double sty = y.dot(s);
  const double s_norm2 = s.squaredNorm();
  if (!(sty > beta1 * s_norm2)) return false;
  if (mode_ == CurvatureMode::Smooth) {
    if (!(s.norm() > beta2)) return false;
  } else {
    if (!(y.norm() <= lipschitz_cap * s.norm())) return false;
  }
  // Accepted pairs satisfy y^T y / (y^T s) >= beta1; a violation here means
  // the acceptance arithmetic above is broken.
  assert(y.squaredNorm() >= beta1 * sty * (1.0 - 1e-12));

  if (static_cast<int>(pairs_.size()) == capacity_) pairs_.pop_front();
  pairs_.push_back(CurvaturePair{s, y, 1.0 / sty});
  return true;
}

double LbfgsMemory::initial_scaling() const {
  if (pairs_.empty()) return 1.0;
  const CurvaturePair& newest = pairs_.back();
  return newest.y.dot(newest.s) / newest.y.squaredNorm();
}

Eigen::VectorXd LbfgsMemory::two_loop(const Eigen::VectorXd& g) const {
  if (pairs_.empty()) return g;

  const std::size_t m = pairs_.size();
  std::vector<double> alpha(m);
  Eigen::VectorXd q = g;
  for (std::size_t i = m; i-- > 0;) {
    alpha[i] = pairs_[i].rho * pairs_[i].s.dot(q);
    q.noalias() -= alpha[i] * pairs_[i].y;
  }
  Eigen::VectorXd r = initial_scaling() * q;
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = pairs_[i].rho * pairs_[i].y.dot(r);
    r.noalias() += (alpha[i] - beta) * pairs_[i].s;
  }
  return r;
}

}  // namespace zoqn
