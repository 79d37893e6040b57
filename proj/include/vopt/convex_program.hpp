#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vopt/linalg.hpp"

namespace vopt {

/// Scalar function with gradient and Hessian oracles.
struct SmoothFn {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

SmoothFn linear_fn(Vec coeff, double constant);

/// min objective(x) s.t. constraints[i](x) <= 0. All functions convex.
/// If no start is supplied, a phase-I pass searches for a strictly
/// feasible point first.
struct ConvexProgram {
  int n_vars = 0;
  SmoothFn objective;
  std::vector<SmoothFn> constraints;
  std::optional<Vec> start;
};

struct BarrierOptions {
  double mu = 20.0;
  double t0 = 1.0;
  double newton_tol = 1e-10;  // gradient norm target, scaled by the barrier parameter
  int max_newton = 200;       // per centering step
  int max_outer = 60;
};

struct BarrierResult {
  Vec x;
  double objective = 0.0;
  int newton_iters = 0;
  int outer_iters = 0;
};

/// Log-barrier path following with damped Newton centering. Terminates when
/// the duality-gap estimate m/t falls below tol.
BarrierResult barrier_solve(const ConvexProgram& prog, double tol, const BarrierOptions& opt = {});

}  // namespace vopt
