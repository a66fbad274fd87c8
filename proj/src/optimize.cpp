#include <algorithm>
#include <cmath>
#include <limits>

#include "difsi/workbench.hpp"

namespace difsi {

Vector Bounds::project(const Vector& x) const {
  Vector p = x;
  if (lower.size() == x.size()) p = p.cwiseMax(lower);
  if (upper.size() == x.size()) p = p.cwiseMin(upper);
  return p;
}

bool Bounds::contains(const Vector& x) const { return project(x) == x; }

namespace {

struct Evaluation {
  bool ok = false;
  double loss = 0.0;
  Vector grad;
};

Evaluation evaluate(const ObjectiveFunction& f, const Vector& x) {
  try {
    auto [loss, grad] = f(x);
    if (!std::isfinite(loss) || !grad.allFinite()) return {};
    return {true, loss, std::move(grad)};
  } catch (const Error&) {
    return {};
  }
}

double projected_gradient_norm(const Bounds& bounds, const Vector& x, const Vector& g) {
  return (bounds.project(x - g) - x).lpNorm<Eigen::Infinity>();
}

}  // namespace

BfgsResult bfgs_optimize(const ObjectiveFunction& objective, const Vector& theta0, const Bounds& bounds,
                         const BfgsOptions& options) {
  if (!bounds.contains(theta0)) throw Error("bfgs: initial parameters violate the bounds");
  const Eigen::Index n = theta0.size();
  Evaluation cur = evaluate(objective, theta0);
  if (!cur.ok) throw Error("bfgs: objective cannot be evaluated at the initial parameters");

  BfgsResult out;
  out.theta = theta0;
  out.loss = cur.loss;
  out.loss_history.push_back(cur.loss);
  out.theta_history.push_back(theta0);

  // Largest first step: a tenth of the narrowest finite bound range.
  double first_step = std::numeric_limits<double>::infinity();
  if (bounds.lower.size() == n && bounds.upper.size() == n) {
    first_step = 0.1 * (bounds.upper - bounds.lower).minCoeff();
  }

  Matrix H = Matrix::Identity(n, n);
  bool fresh = true;
  for (int it = 0; it < options.max_iters; ++it) {
    if (projected_gradient_norm(bounds, out.theta, cur.grad) <= options.gradient_tol) {
      out.converged = true;
      break;
    }
    Vector d = -H * cur.grad;
    if (cur.grad.dot(d) >= 0.0) {
      H.setIdentity();
      fresh = true;
      d = -cur.grad;
    }
    if (fresh && std::isfinite(first_step)) {
      const double dmax = d.lpNorm<Eigen::Infinity>();
      if (dmax > first_step) d *= first_step / dmax;
    }

    double alpha = 1.0;
    bool accepted = false;
    Vector trial;
    Evaluation next;
    for (int k = 0; k <= options.max_backtracks; ++k, alpha *= options.backtrack) {
      trial = bounds.project(out.theta + alpha * d);
      const double decrease = cur.grad.dot(trial - out.theta);
      if (!(decrease < 0.0)) continue;
      next = evaluate(objective, trial);
      if (next.ok && next.loss <= cur.loss + options.armijo_c1 * decrease && next.loss < cur.loss) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }

    const Vector s = trial - out.theta;
    const Vector y = next.grad - cur.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Matrix I = Matrix::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
      fresh = false;
    }

    const double previous = cur.loss;
    out.theta = trial;
    cur = std::move(next);
    out.loss = cur.loss;
    out.loss_history.push_back(cur.loss);
    out.theta_history.push_back(out.theta);
    out.iterations = it + 1;
    if (std::abs(previous - cur.loss) <= options.relative_loss_tol * std::max(std::abs(previous), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace difsi
