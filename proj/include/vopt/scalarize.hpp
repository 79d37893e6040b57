#pragma once

#include <optional>

#include "vopt/metric.hpp"
#include "vopt/polytope.hpp"
#include "vopt/problems.hpp"

namespace vopt {

/// Distances below this threshold count as "reference point inside the
/// slice": no cut normal is produced.
inline constexpr double kSeparationThreshold = 1e-8;

enum class SolveStatus { Optimal, MaxIter, Infeasible };

struct ScalarizationResult {
  Vec x_star;
  Vec z_star;
  double value = 0.0;               // ||z*||_M = d_M(v, A)
  std::optional<Vec> cut_normal;    // g* = M z* / ||z*||_M, unset when degenerate
  Vec y_boundary;                   // v + z*
  Vec y_image;                      // Gamma(x*)
  SolveStatus status = SolveStatus::Optimal;
};

/// Norm-minimizing scalarization: distance from v to the sliced upper image
/// in the M-norm, solved as the smooth surrogate min 1/2 z'Mz over the same
/// constraints (identical minimizer; the cut normal is recovered from the
/// stationarity identity rather than from barrier multipliers).
ScalarizationResult solve_norm_min(const ProblemSpec& p, const Vec& v, const SpdMatrix& m, double tol);

struct WeightedSumResult {
  Vec x_star;
  double support = 0.0;  // min omega . Gamma(x) over X
};

/// min omega . Gamma(x) over X for omega in the dual cone; yields the initial
/// supporting halfspace {y : omega . y >= support}.
WeightedSumResult weighted_sum(const ProblemSpec& p, const Vec& omega, double tol = 1e-12);

enum class CutPoint { ImagePoint, BoundaryPoint };

/// Supporting halfspace from a nondegenerate scalarization: normal g*, offset
/// g* . y with y the image point (default) or the boundary point v + z*.
Halfspace extract_cut(const ScalarizationResult& r, CutPoint mode);

}  // namespace vopt
