#pragma once

#include <functional>

#include "calib/dataset.hpp"

namespace calib::optimize {

struct ScalarMinResult {
  double argmin = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool at_boundary = false;
};

struct GradMinResult {
  Vector params;
  double value = 0.0;
  double grad_max_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ScalarObjective = std::function<double(double)>;

/// Objective returning its value and writing the gradient into the second argument.
using Objective = std::function<double(const Vector&, Vector&)>;

struct LineSearchOptions {
  double armijo = 1e-4;
  double initial_step = 1.0;
  int max_halvings = 60;
};

/// Golden-section search on [lo, hi]. For unimodal f the result is within tol of the minimizer;
/// at_boundary is set when that minimizer lies within tol of an endpoint.
ScalarMinResult minimize_scalar(const ScalarObjective& f, double lo, double hi, double tol);

/// Steepest descent with Armijo backtracking (step halving). The objective never increases
/// across accepted steps; stops when the gradient max-norm drops below grad_tol.
GradMinResult minimize_grad(const Objective& f, Vector init, double grad_tol, int max_iters,
                            const LineSearchOptions& options = {});

/// Largest relative error between the analytic gradient and central differences with step h.
/// The denominator of each coordinate is max(|analytic|, 1e-8).
double check_gradient(const Objective& f, const Vector& point, double h);

}  // namespace calib::optimize
