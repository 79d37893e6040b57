#include "vopt/convex_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vopt/errors.hpp"

namespace vopt {

SmoothFn linear_fn(Vec coeff, double constant) {
  SmoothFn f;
  const int n = static_cast<int>(coeff.size());
  f.value = [coeff, constant](const Vec& x) { return dot(coeff, x) + constant; };
  f.grad = [coeff](const Vec&) { return coeff; };
  f.hess = [n](const Vec&) { return Mat(n, n, 0.0); };
  return f;
}

namespace {

double max_constraint(const std::vector<SmoothFn>& cons, const Vec& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& c : cons) m = std::max(m, c.value(x));
  return m;
}

bool strictly_feasible(const std::vector<SmoothFn>& cons, const Vec& x) {
  for (const auto& c : cons) {
    double v = c.value(x);
    if (!(v < 0.0) || !std::isfinite(v)) return false;
  }
  return true;
}

// t*f0 - sum log(-f_i); +inf outside the domain
double merit(const ConvexProgram& prog, const Vec& x, double t) {
  double m = t * prog.objective.value(x);
  for (const auto& c : prog.constraints) {
    double v = c.value(x);
    if (!(v < 0.0)) return std::numeric_limits<double>::infinity();
    m -= std::log(-v);
  }
  return m;
}

// Damped Newton on t*f0 + barrier. Returns Newton iterations used.
// early_stop, when set, is checked after every accepted step.
int center(const ConvexProgram& prog, Vec& x, double t, const BarrierOptions& opt,
           const std::function<bool(const Vec&)>& early_stop) {
  const int n = prog.n_vars;
  for (int it = 0; it < opt.max_newton; ++it) {
    Vec g = scaled(prog.objective.grad(x), t);
    Mat h = scaled(prog.objective.hess(x), t);
    for (const auto& c : prog.constraints) {
      double v = c.value(x);
      Vec cg = c.grad(x);
      double inv = 1.0 / (-v);
      axpy(inv, cg, g);
      Mat rank1 = outer(cg, cg);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) += rank1(i, j) * inv * inv;
      Mat ch = c.hess(x);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) += ch(i, j) * inv;
    }
    if (norm2(g) <= opt.newton_tol * std::max(1.0, t)) return it;

    Vec rhs = scaled(g, -1.0);
    std::optional<Vec> step = cholesky_solve(h, rhs);
    double ridge = 0.0;
    double hscale = 0.0;
    for (int i = 0; i < n; ++i) hscale = std::max(hscale, std::abs(h(i, i)));
    while (!step) {
      ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, hscale) : ridge * 100.0;
      if (ridge > 1e6 * std::max(1.0, hscale)) fail(ErrorKind::MaxIter, "newton: singular hessian");
      Mat hr(h);
      for (int i = 0; i < n; ++i) hr(i, i) += ridge;
      step = cholesky_solve(hr, rhs);
    }

    double gtd = dot(g, *step);
    double phi0 = merit(prog, x, t);
    double alpha = 1.0;
    bool accepted = false;
    Vec xn;
    while (alpha >= 1e-18) {
      xn = x;
      axpy(alpha, *step, xn);
      double phin = merit(prog, xn, t);
      if (phin <= phi0 + 1e-4 * alpha * gtd) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return it;  // step size exhausted; as centered as doubles allow
    x = xn;
    if (early_stop && early_stop(x)) return it + 1;
  }
  fail(ErrorKind::MaxIter, "newton: iteration cap exceeded");
}

Vec phase_one(const ConvexProgram& prog, const BarrierOptions& opt) {
  // minimize s over (x, s) with f_i(x) - s <= 0; any point with s < 0 works
  const int n = prog.n_vars;
  ConvexProgram aug;
  aug.n_vars = n + 1;
  Vec obj(n + 1, 0.0);
  obj[n] = 1.0;
  aug.objective = linear_fn(obj, 0.0);
  for (const auto& c : prog.constraints) {
    SmoothFn f;
    f.value = [c, n](const Vec& u) {
      Vec x(u.begin(), u.begin() + n);
      return c.value(x) - u[n];
    };
    f.grad = [c, n](const Vec& u) {
      Vec x(u.begin(), u.begin() + n);
      Vec g = c.grad(x);
      g.push_back(-1.0);
      return g;
    };
    f.hess = [c, n](const Vec& u) {
      Vec x(u.begin(), u.begin() + n);
      Mat hx = c.hess(x);
      Mat h(n + 1, n + 1, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = hx(i, j);
      return h;
    };
    aug.constraints.push_back(std::move(f));
  }

  Vec x0(n, 0.0);
  Vec u(n + 1, 0.0);
  for (int i = 0; i < n; ++i) u[i] = x0[i];
  u[n] = max_constraint(prog.constraints, x0) + 1.0;

  auto feasible_now = [&](const Vec& ucur) {
    Vec x(ucur.begin(), ucur.begin() + n);
    return max_constraint(prog.constraints, x) < -1e-9;
  };

  double t = opt.t0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    center(aug, u, t, opt, feasible_now);
    if (feasible_now(u)) return Vec(u.begin(), u.begin() + n);
    if (static_cast<double>(aug.constraints.size()) / t <= 1e-10) break;
    t *= opt.mu;
  }
  if (u[n] > 1e-8) fail(ErrorKind::Infeasible, "phase-I optimum above threshold");
  fail(ErrorKind::Infeasible, "phase-I could not certify strict feasibility");
}

}  // namespace

BarrierResult barrier_solve(const ConvexProgram& prog, double tol, const BarrierOptions& opt) {
  BarrierResult res;
  Vec x = prog.start ? *prog.start : phase_one(prog, opt);
  if (!prog.constraints.empty() && !strictly_feasible(prog.constraints, x)) {
    if (prog.start) {
      x = phase_one(prog, opt);
    } else {
      fail(ErrorKind::Infeasible, "no strictly feasible point");
    }
  }

  if (prog.constraints.empty()) {
    // plain Newton, no barrier path
    res.newton_iters = center(prog, x, 1.0, opt, nullptr);
    res.x = x;
    res.objective = prog.objective.value(x);
    return res;
  }

  const double m = static_cast<double>(prog.constraints.size());
  double t = opt.t0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    res.newton_iters += center(prog, x, t, opt, nullptr);
    res.outer_iters = outer + 1;
    if (m / t <= tol) {
      res.x = x;
      res.objective = prog.objective.value(x);
      return res;
    }
    t *= opt.mu;
  }
  fail(ErrorKind::MaxIter, "barrier: outer iteration cap exceeded");
}

}  // namespace vopt
