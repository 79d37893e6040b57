#pragma once

#include <random>
#include <string>
#include <vector>

#include "vopt/convex_program.hpp"
#include "vopt/linalg.hpp"
#include "vopt/metric.hpp"

namespace vopt {

/// A bounded convex vector optimization instance: objective map with
/// derivative oracles, feasible-set constraints with a strictly interior
/// point, ordering cone C = {y : G y >= 0} (G invertible), and the slice
/// cap w_bar . y <= slice_level that makes the working set compact.
struct ProblemSpec {
  std::string name;
  int q = 0;  // objective dimension
  int n = 0;  // decision dimension

  std::vector<SmoothFn> objectives;    // components of the objective map
  std::vector<SmoothFn> feasible_set;  // constraints f(x) <= 0 defining X
  Vec x0;                              // strictly interior point of X

  Mat cone_G;
  Mat cone_G_inv;
  Vec w_bar;                 // interior dual-cone slice direction
  double slice_level = 0.0;  // gamma
  Vec c_int;                 // interior cone direction, G c_int > 0

  // benchmark identity for the brute-force oracle and feasible-set sampler;
  // cleared / preserved by transform_problem respectively
  std::string oracle_tag;
  std::string sampler_tag;

  Vec objective_value(const Vec& x) const;
  Mat objective_jacobian(const Vec& x) const;  // q x n
};

/// Unit ball at e = (1,...,1) with identity objectives, q in {2,3,4}.
ProblemSpec make_ball(int q);

/// Tri-objective squared distances to three anchor points over a polygon.
ProblemSpec make_example2();

/// Parabolic-front bi-objective instance (-x1, x1 + x2^2).
ProblemSpec make_jahn();

/// Lookup by CLI name: ball2, ball3, ball4, example2, jahn.
ProblemSpec by_name(const std::string& name);

/// Pushforward through the SPD factor T: objectives T*Gamma, cone T*C,
/// slice direction T^-1 w_bar, same slice level.
ProblemSpec transform_problem(const ProblemSpec& p, const SpdMatrix& t);

/// Brute-force M-distance from v to the sliced upper image, independent of
/// the scalarization solver (derivative-free search over exact membership /
/// feasibility tests). Accuracy target 1e-3. Benchmarks only.
double oracle_distance(const ProblemSpec& p, const Vec& v, const SpdMatrix& m);

/// Random point of X (benchmarks only; used by audits and tests).
Vec sample_feasible_point(const ProblemSpec& p, std::mt19937_64& rng);

/// Random point of the compact slice A = (Gamma(X) + C) ∩ {w_bar.y <= gamma}.
Vec sample_slice_point(const ProblemSpec& p, std::mt19937_64& rng);

}  // namespace vopt
