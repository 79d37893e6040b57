#pragma once

#include <vector>

#include "vopt/linalg.hpp"

namespace vopt {

inline constexpr double kFeasTol = 1e-9;
inline constexpr double kDedupTol = 1e-8;
inline constexpr int kMaxEnumDim = 4;

/// Halfspace {y : normal . y >= offset}. Cap-style constraints a.y <= b are
/// stored with flipped signs.
struct Halfspace {
  Vec normal;
  double offset = 0.0;

  Halfspace(Vec n, double o);

  bool contains(const Vec& y, double tol = kFeasTol) const;
};

/// H-representation of a polyhedron with a lazily maintained vertex cache.
/// Halfspaces are kept in insertion order (redundant ones included); the
/// vertex list, when valid, is duplicate-free and lexicographically sorted.
class Polytope {
 public:
  explicit Polytope(std::vector<Halfspace> hs);

  int dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return hs_; }

  bool contains(const Vec& y, double tol = kFeasTol) const;

  /// Extreme points; enumerates and caches on first use.
  const std::vector<Vec>& vertices() const;
  bool vertices_valid() const { return verts_valid_; }

  friend Polytope intersect(const Polytope& poly, const Halfspace& h);

 private:
  int dim_ = 0;
  std::vector<Halfspace> hs_;
  mutable std::vector<Vec> verts_;
  mutable bool verts_valid_ = false;
};

/// Feasible set of poly cut by h. When poly's vertex cache is valid the
/// result's cache is updated incrementally (surviving vertices keep their
/// exact coordinates); otherwise it is left invalid.
Polytope intersect(const Polytope& poly, const Halfspace& h);

/// All extreme points of the H-rep by exhaustive q-subset solves, feasibility
/// filtering and deduplication; sorted lexicographically. Guarded to q <= 4.
std::vector<Vec> enumerate_vertices(const Polytope& poly);

struct LpResult {
  Vec vertex;
  double value = 0.0;
};

/// max direction . y over the polytope via dense simplex with Bland's rule;
/// ties between optimal vertices are resolved to the lexicographically
/// smallest one by staged re-optimization on the optimal face.
LpResult lp_max(const Polytope& poly, const Vec& direction);

/// Euclidean distance from a point to the polytope (0 if inside), via the
/// log-barrier QP min ||y - v||^2 over the H-rep.
double point_distance(const Polytope& poly, const Vec& v);

/// max over vertices v of outer of d_2(v, inner), for inner contained in
/// outer (checked; NotNested otherwise). For nested polytopes this equals
/// their Hausdorff distance.
double hausdorff_nested(const Polytope& outer, const Polytope& inner);

}  // namespace vopt
