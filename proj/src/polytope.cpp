#include "vopt/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vopt/convex_program.hpp"
#include "vopt/errors.hpp"
#include "vopt/parallel.hpp"

namespace vopt {

Halfspace::Halfspace(Vec n, double o) : normal(std::move(n)), offset(o) {
  if (norm2(normal) <= 1e-12) fail(ErrorKind::ZeroNormal, "halfspace normal too small");
}

bool Halfspace::contains(const Vec& y, double tol) const { return dot(normal, y) >= offset - tol; }

Polytope::Polytope(std::vector<Halfspace> hs) : hs_(std::move(hs)) {
  if (hs_.empty()) fail(ErrorKind::InvalidArgument, "polytope needs at least one halfspace");
  dim_ = static_cast<int>(hs_.front().normal.size());
  for (const auto& h : hs_)
    if (static_cast<int>(h.normal.size()) != dim_)
      fail(ErrorKind::InvalidArgument, "halfspace dimension mismatch");
}

bool Polytope::contains(const Vec& y, double tol) const {
  for (const auto& h : hs_)
    if (!h.contains(y, tol)) return false;
  return true;
}

const std::vector<Vec>& Polytope::vertices() const {
  if (!verts_valid_) {
    verts_ = enumerate_vertices(*this);
    verts_valid_ = true;
  }
  return verts_;
}

namespace {

bool near_duplicate(const Vec& a, const Vec& b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

// sorted-insert dedup: keeps `points` lexicographically sorted, skips
// candidates within tol of an existing member
void insert_dedup(std::vector<Vec>& points, const Vec& cand, double tol) {
  auto pos = std::lower_bound(points.begin(), points.end(), cand,
                              [](const Vec& a, const Vec& b) { return lex_less(a, b); });
  // scan the tol window on both sides of the insertion point
  for (auto it = pos; it != points.end() && (*it)[0] - cand[0] <= tol; ++it)
    if (near_duplicate(*it, cand, tol)) return;
  if (pos != points.begin()) {
    for (auto it = pos; it-- != points.begin() && cand[0] - (*it)[0] <= tol;)
      if (near_duplicate(*it, cand, tol)) return;
  }
  points.insert(pos, cand);
}

std::vector<Vec> sort_dedup(std::vector<Vec> cands, double tol) {
  std::sort(cands.begin(), cands.end(), [](const Vec& a, const Vec& b) { return lex_less(a, b); });
  std::vector<Vec> out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    bool dup = false;
    for (auto it = out.rbegin(); it != out.rend() && c[0] - (*it)[0] <= tol; ++it) {
      if (near_duplicate(*it, c, tol)) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(c);
  }
  return out;
}

// Solves the q x q active system of the given halfspace subset; feasible
// solutions are vertices (the nonsingular subset already certifies q active
// constraints of rank q).
std::optional<Vec> subset_vertex(const std::vector<Halfspace>& hs, const int* idx, int q) {
  Mat a(q, q);
  Vec b(q);
  for (int r = 0; r < q; ++r) {
    const auto& h = hs[idx[r]];
    for (int c = 0; c < q; ++c) a(r, c) = h.normal[c];
    b[r] = h.offset;
  }
  return lu_solve(std::move(a), std::move(b));
}

bool feasible_for_all(const std::vector<Halfspace>& hs, const Vec& y, double tol) {
  for (const auto& h : hs)
    if (!h.contains(y, tol)) return false;
  return true;
}

// all (k)-subsets of {from..m-1} appended to idx at positions [pos, pos+k)
template <class F>
void for_subsets(int from, int m, int k, int* idx, int pos, F&& emit) {
  if (k == 0) {
    emit();
    return;
  }
  for (int i = from; i + k <= m; ++i) {
    idx[pos] = i;
    for_subsets(i + 1, m, k - 1, idx, pos + 1, emit);
  }
}

}  // namespace

std::vector<Vec> enumerate_vertices(const Polytope& poly) {
  const int q = poly.dim();
  if (q > kMaxEnumDim)
    fail(ErrorKind::Capability, "vertex enumeration supports dimension <= 4");
  const auto& hs = poly.halfspaces();
  const int m = static_cast<int>(hs.size());
  if (m < q) return {};

  // parallel over the first constraint of each subset; per-bucket collection
  // keeps the merged result independent of thread count
  std::vector<std::vector<Vec>> buckets(m);
  parallel::for_each_index(static_cast<std::size_t>(m), [&](std::size_t i0) {
    int idx[kMaxEnumDim];
    idx[0] = static_cast<int>(i0);
    for_subsets(static_cast<int>(i0) + 1, m, q - 1, idx, 1, [&] {
      auto cand = subset_vertex(hs, idx, q);
      if (!cand) return;  // singular subset, skipped
      if (feasible_for_all(hs, *cand, kFeasTol)) buckets[i0].push_back(std::move(*cand));
    });
  });

  std::vector<Vec> all;
  for (auto& b : buckets)
    for (auto& v : b) all.push_back(std::move(v));
  return sort_dedup(std::move(all), kDedupTol);
}

Polytope intersect(const Polytope& poly, const Halfspace& h) {
  if (static_cast<int>(h.normal.size()) != poly.dim())
    fail(ErrorKind::InvalidArgument, "halfspace dimension mismatch");
  std::vector<Halfspace> hs = poly.hs_;
  hs.push_back(h);
  Polytope out(std::move(hs));

  if (poly.verts_valid_ && poly.dim() <= kMaxEnumDim) {
    const int q = poly.dim();
    const int m = static_cast<int>(poly.hs_.size());
    std::vector<Vec> merged;
    merged.reserve(poly.verts_.size());
    for (const auto& v : poly.verts_)
      if (h.contains(v, kFeasTol)) merged.push_back(v);  // survivors keep exact coordinates

    // fresh vertices lie on the new hyperplane: pair it with (q-1)-subsets
    // of the previous constraints
    std::vector<std::vector<Vec>> buckets(std::max(m, 1));
    const auto& all_hs = out.hs_;
    if (q == 1) {
      int idx[1] = {m};
      auto cand = subset_vertex(all_hs, idx, 1);
      if (cand && feasible_for_all(all_hs, *cand, kFeasTol)) buckets[0].push_back(std::move(*cand));
    } else {
      parallel::for_each_index(static_cast<std::size_t>(m), [&](std::size_t i0) {
        int idx[kMaxEnumDim];
        idx[0] = static_cast<int>(i0);
        idx[q - 1] = m;  // the new halfspace
        for_subsets(static_cast<int>(i0) + 1, m, q - 2, idx, 1, [&] {
          auto cand = subset_vertex(all_hs, idx, q);
          if (!cand) return;
          if (feasible_for_all(all_hs, *cand, kFeasTol)) buckets[i0].push_back(std::move(*cand));
        });
      });
    }
    std::vector<Vec> fresh;
    for (auto& b : buckets)
      for (auto& v : b) fresh.push_back(std::move(v));
    fresh = sort_dedup(std::move(fresh), kDedupTol);
    for (const auto& c : fresh) insert_dedup(merged, c, kDedupTol);
    out.verts_ = std::move(merged);
    out.verts_valid_ = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// dense simplex with Bland's rule and staged lexicographic tie-breaking
// ---------------------------------------------------------------------------

namespace {

constexpr double kRcTol = 1e-9;
constexpr double kPivTol = 1e-11;

class SimplexTableau {
 public:
  // maximize over {y : A y <= b} with y free, via y = u+ - u- and slacks
  SimplexTableau(const Mat& a, const Vec& b, int q) : m_(a.rows()), q_(q) {
    nstruct_ = 2 * q_ + m_;
    rows_.assign(m_, Vec(nstruct_, 0.0));
    rhs_.resize(m_);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < q_; ++j) {
        rows_[i][j] = a(i, j);
        rows_[i][q_ + j] = -a(i, j);
      }
      rows_[i][2 * q_ + i] = 1.0;
      rhs_[i] = b[i];
    }
  }

  void solve_phase1() {
    int n_art = 0;
    std::vector<int> art_col(m_, -1);
    for (int i = 0; i < m_; ++i)
      if (rhs_[i] < 0.0) ++n_art;
    if (n_art == 0) {
      for (int i = 0; i < m_; ++i) basis_[i] = 2 * q_ + i;
      return;
    }
    const int total = nstruct_ + n_art;
    int next_art = nstruct_;
    for (int i = 0; i < m_; ++i) {
      rows_[i].resize(total, 0.0);
      if (rhs_[i] < 0.0) {
        for (double& x : rows_[i]) x = -x;
        rhs_[i] = -rhs_[i];
        rows_[i][next_art] = 1.0;
        art_col[i] = next_art;
        basis_[i] = next_art;
        ++next_art;
      } else {
        basis_[i] = 2 * q_ + i;
      }
    }
    // maximize -(sum of artificials)
    Vec c(total, 0.0);
    for (int j = nstruct_; j < total; ++j) c[j] = -1.0;
    run_stage(c, {}, total);

    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= nstruct_) infeas += rhs_[i];
    if (infeas > 1e-8) fail(ErrorKind::Infeasible, "lp: phase-I optimum positive");

    // drive artificials out of the basis; dependent rows are dropped
    for (int i = 0; i < m_;) {
      if (basis_[i] < nstruct_) {
        ++i;
        continue;
      }
      int pc = -1;
      for (int j = 0; j < nstruct_; ++j)
        if (std::abs(rows_[i][j]) > kPivTol) {
          pc = j;
          break;
        }
      if (pc >= 0) {
        pivot(i, pc, nullptr);
        ++i;
      } else {
        rows_.erase(rows_.begin() + i);
        rhs_.erase(rhs_.begin() + i);
        basis_.erase(basis_.begin() + i);
        --m_;
      }
    }
    for (auto& r : rows_) r.resize(nstruct_);
  }

  // maximize c while keeping the reduced costs of frozen objectives at zero;
  // returns the frozen reduced-cost row for this stage
  Vec run_stage(const Vec& c, const std::vector<Vec*>& frozen, int width = -1) {
    const int n = width < 0 ? nstruct_ : width;
    Vec r(c.begin(), c.begin() + n);
    for (int i = 0; i < m_; ++i) {
      double cb = c[basis_[i]];
      if (cb != 0.0)
        for (int j = 0; j < n; ++j) r[j] -= cb * rows_[i][j];
    }
    for (int iter = 0; iter < 20000; ++iter) {
      int pc = -1;
      for (int j = 0; j < n; ++j) {
        if (r[j] <= kRcTol) continue;
        bool free_col = true;
        for (const Vec* f : frozen)
          if (std::abs((*f)[j]) > kRcTol) {
            free_col = false;
            break;
          }
        if (free_col) {
          pc = j;  // Bland: smallest eligible index
          break;
        }
      }
      if (pc < 0) return r;
      int pr = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (rows_[i][pc] <= kPivTol) continue;
        double ratio = std::max(rhs_[i], 0.0) / rows_[i][pc];
        if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && (pr < 0 || basis_[i] < basis_[pr]))) {
          if (ratio < best) best = ratio;
          pr = i;
        }
      }
      if (pr < 0) fail(ErrorKind::Unbounded, "lp: unbounded direction");
      pivot(pr, pc, &r);
      for (const Vec* f : frozen) pivot_update_row(pr, pc, *const_cast<Vec*>(f));
    }
    fail(ErrorKind::MaxIter, "lp: pivot cap exceeded");
  }

  Vec solution(int q) const {
    Vec x(nstruct_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < nstruct_) x[basis_[i]] = rhs_[i];
    Vec y(q);
    for (int j = 0; j < q; ++j) y[j] = x[j] - x[q + j];
    return y;
  }

 private:
  void pivot(int pr, int pc, Vec* robj) {
    double p = rows_[pr][pc];
    for (double& x : rows_[pr]) x /= p;
    rhs_[pr] /= p;
    for (int i = 0; i < m_; ++i) {
      if (i == pr) continue;
      double f = rows_[i][pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < rows_[i].size(); ++j) rows_[i][j] -= f * rows_[pr][j];
      rows_[i][pc] = 0.0;
      rhs_[i] -= f * rhs_[pr];
    }
    if (robj) pivot_update_row(pr, pc, *robj);
    basis_[pr] = pc;
  }

  void pivot_update_row(int pr, int pc, Vec& r) const {
    double f = r[pc];
    if (f == 0.0) return;
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= f * rows_[pr][j];
    r[pc] = 0.0;
  }

  int m_;
  int q_;
  int nstruct_;
  std::vector<Vec> rows_;
  Vec rhs_;
  std::vector<int> basis_;
};

}  // namespace

LpResult lp_max(const Polytope& poly, const Vec& direction) {
  const int q = poly.dim();
  if (static_cast<int>(direction.size()) != q)
    fail(ErrorKind::InvalidArgument, "lp_max: direction dimension mismatch");
  const auto& hs = poly.halfspaces();
  const int m = static_cast<int>(hs.size());
  Mat a(m, q);
  Vec b(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < q; ++j) a(i, j) = -hs[i].normal[j];
    b[i] = -hs[i].offset;
  }

  SimplexTableau tab(a, b, q);
  tab.solve_phase1();

  Vec c0(2 * q + m, 0.0);
  for (int j = 0; j < q; ++j) {
    c0[j] = direction[j];
    c0[q + j] = -direction[j];
  }
  std::vector<Vec> frozen_rows;
  frozen_rows.reserve(q + 1);
  std::vector<Vec*> frozen_ptrs;
  frozen_rows.push_back(tab.run_stage(c0, frozen_ptrs));
  frozen_ptrs.push_back(&frozen_rows.back());
  // lexicographic refinement: minimize each coordinate over the optimal face
  for (int i = 0; i < q; ++i) {
    Vec ci(2 * q + m, 0.0);
    ci[i] = -1.0;
    ci[q + i] = 1.0;
    frozen_rows.push_back(tab.run_stage(ci, frozen_ptrs));
    frozen_ptrs.clear();
    for (auto& fr : frozen_rows) frozen_ptrs.push_back(&fr);
  }

  LpResult res;
  res.vertex = tab.solution(q);
  res.value = dot(direction, res.vertex);
  return res;
}

double point_distance(const Polytope& poly, const Vec& v) {
  const int q = poly.dim();
  if (poly.contains(v, 1e-12)) return 0.0;

  // scale by the largest single-constraint violation distance so the QP
  // optimum has unit order of magnitude regardless of how far v is
  double scale = 0.0;
  for (const auto& h : poly.halfspaces()) {
    double viol = (h.offset - dot(h.normal, v)) / norm2(h.normal);
    scale = std::max(scale, viol);
  }
  if (scale <= 0.0) scale = 1.0;

  ConvexProgram qp;
  qp.n_vars = q;
  qp.objective.value = [](const Vec& y) { return dot(y, y); };
  qp.objective.grad = [](const Vec& y) { return scaled(y, 2.0); };
  qp.objective.hess = [q](const Vec&) { return scaled(Mat::identity(q), 2.0); };
  for (const auto& h : poly.halfspaces()) {
    // h.normal . (v + scale*y) >= h.offset, rewritten <= 0
    Vec coeff = scaled(h.normal, -scale);
    qp.constraints.push_back(linear_fn(coeff, h.offset - dot(h.normal, v)));
  }

  const auto& verts = poly.vertices();
  if (verts.empty()) fail(ErrorKind::Infeasible, "point_distance: empty polytope");
  Vec centroid(q, 0.0);
  for (const auto& w : verts) axpy(1.0 / verts.size(), w, centroid);
  Vec start(q);
  for (int j = 0; j < q; ++j) start[j] = (centroid[j] - v[j]) / scale;
  bool strict = true;
  for (const auto& c : qp.constraints)
    if (c.value(start) >= -1e-12) strict = false;
  if (strict) qp.start = start;

  BarrierResult r = barrier_solve(qp, 1e-10);
  return scale * std::sqrt(std::max(0.0, r.objective));
}

double hausdorff_nested(const Polytope& outer, const Polytope& inner) {
  if (outer.dim() != inner.dim()) fail(ErrorKind::InvalidArgument, "dimension mismatch");
  const auto& iv = inner.vertices();
  if (iv.empty()) fail(ErrorKind::NotNested, "inner polytope is empty");
  for (const auto& v : iv)
    if (!outer.contains(v, 1e-7)) fail(ErrorKind::NotNested, "inner vertex outside outer polytope");

  const auto& ov = outer.vertices();
  std::vector<double> dist(ov.size(), 0.0);
  parallel::for_each_index(ov.size(), [&](std::size_t i) {
    if (!inner.contains(ov[i], kFeasTol)) dist[i] = point_distance(inner, ov[i]);
  });
  double best = 0.0;
  for (double d : dist) best = std::max(best, d);
  return best;
}

}  // namespace vopt
