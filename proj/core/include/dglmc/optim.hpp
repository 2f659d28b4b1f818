#pragma once

#include <functional>

#include <Eigen/Dense>

namespace dglmc {

struct NewtonOptions {
  double grad_tol = 1e-10;
  int max_iter = 200;
};

struct NewtonResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton minimization of a smooth strongly convex function.
/// Backtracking (Armijo) line search on the value; stops when the gradient
/// norm drops below grad_tol * max(1, |value|) — the relative scaling keeps
/// the criterion reachable in double precision when the objective is a sum
/// over many observations.
NewtonResult newton_minimize(
    const std::function<double(const Eigen::VectorXd&)>& value,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& hess,
    const Eigen::VectorXd& x0, const NewtonOptions& opts = {});

}  // namespace dglmc
