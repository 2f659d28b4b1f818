#include "dglmc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dglmc {

NewtonResult newton_minimize(
    const std::function<double(const Eigen::VectorXd&)>& value,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& hess,
    const Eigen::VectorXd& x0, const NewtonOptions& opts) {
  NewtonResult res;
  res.x = x0;
  res.value = value(res.x);
  const auto tight_enough = [&] {
    return res.grad_norm <= opts.grad_tol * std::max(1.0, std::abs(res.value));
  };
  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd g = grad(res.x);
    res.grad_norm = g.norm();
    res.iterations = it;
    if (tight_enough()) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd dir;
    Eigen::LLT<Eigen::MatrixXd> llt(hess(res.x));
    if (llt.info() == Eigen::Success) {
      dir = llt.solve(g);
    } else {
      dir = g;  // gradient fallback for a numerically indefinite Hessian
    }
    // Armijo backtracking.
    const double slope = g.dot(dir);
    double t = 1.0;
    bool stepped = false;
    for (int k = 0; k < 60; ++k) {
      const Eigen::VectorXd cand = res.x - t * dir;
      const double v = value(cand);
      if (v <= res.value - 1e-4 * t * slope) {
        res.x = cand;
        res.value = v;
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    if (!stepped) break;  // no descent possible at double precision
  }
  const Eigen::VectorXd g = grad(res.x);
  res.grad_norm = g.norm();
  res.converged = tight_enough();
  return res;
}

}  // namespace dglmc
