#include "calib/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace calib::optimize {
namespace {

double checked(double v, const char* where) {
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteObjective, std::string(where) + ": objective is not finite");
  return v;
}

}  // namespace

ScalarMinResult minimize_scalar(const ScalarObjective& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw Error(ErrorKind::Usage, "minimize_scalar: need lo < hi");
  if (!(tol > 0.0)) throw Error(ErrorKind::Usage, "minimize_scalar: need tol > 0");

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = checked(f(x1), "minimize_scalar");
  double f2 = checked(f(x2), "minimize_scalar");
  int iterations = 0;
  while (b - a > tol) {
    ++iterations;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = checked(f(x1), "minimize_scalar");
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = checked(f(x2), "minimize_scalar");
    }
  }

  ScalarMinResult r;
  r.argmin = std::clamp(0.5 * (a + b), lo, hi);
  r.value = checked(f(r.argmin), "minimize_scalar");
  r.iterations = iterations;
  r.at_boundary = (r.argmin - lo) <= tol || (hi - r.argmin) <= tol;
  return r;
}

GradMinResult minimize_grad(const Objective& f, Vector init, double grad_tol, int max_iters,
                            const LineSearchOptions& options) {
  if (!(grad_tol > 0.0)) throw Error(ErrorKind::Usage, "minimize_grad: need grad_tol > 0");

  GradMinResult r;
  r.params = std::move(init);
  Vector grad(r.params.size());
  r.value = checked(f(r.params, grad), "minimize_grad");
  if (grad.size() != r.params.size()) {
    throw Error(ErrorKind::DimensionMismatch, "minimize_grad: gradient size differs from parameter size");
  }
  if (!all_finite(grad)) throw Error(ErrorKind::NonFiniteObjective, "minimize_grad: gradient is not finite");

  Vector trial(r.params.size());
  Vector trial_grad(r.params.size());
  while (true) {
    r.grad_max_norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (r.grad_max_norm < grad_tol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= max_iters) break;

    const double slope = grad.squaredNorm();
    double step = options.initial_step;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      trial = r.params - step * grad;
      if (trial == r.params) break;
      const double value = f(trial, trial_grad);
      if (std::isfinite(value) && all_finite(trial_grad) && value <= r.value - options.armijo * step * slope) {
        r.params.swap(trial);
        grad.swap(trial_grad);
        r.value = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorKind::LineSearchFailure,
                  "minimize_grad: no sufficient decrease after " + std::to_string(options.max_halvings) +
                      " halvings (gradient max-norm " + format_double(r.grad_max_norm) + ")");
    }
    ++r.iterations;
  }
  return r;
}

double check_gradient(const Objective& f, const Vector& point, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::Usage, "check_gradient: need h > 0");
  Vector analytic(point.size());
  checked(f(point, analytic), "check_gradient");

  Vector scratch(point.size());
  Vector x = point;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    x(i) = point(i) + h;
    const double up = checked(f(x, scratch), "check_gradient");
    x(i) = point(i) - h;
    const double down = checked(f(x, scratch), "check_gradient");
    x(i) = point(i);
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(numeric - analytic(i)) / std::max(std::abs(analytic(i)), 1e-8));
  }
  return worst;
}

}  // namespace calib::optimize
