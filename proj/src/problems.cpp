#include "vopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "vopt/errors.hpp"
#include "vopt/polytope.hpp"

namespace vopt {

Vec ProblemSpec::objective_value(const Vec& x) const {
  Vec y(q);
  for (int j = 0; j < q; ++j) y[j] = objectives[j].value(x);
  return y;
}

Mat ProblemSpec::objective_jacobian(const Vec& x) const {
  Mat jac(q, n);
  for (int j = 0; j < q; ++j) {
    Vec g = objectives[j].grad(x);
    for (int i = 0; i < n; ++i) jac(j, i) = g[i];
  }
  return jac;
}

namespace {

SmoothFn coordinate_fn(int n, int j) {
  SmoothFn f;
  f.value = [j](const Vec& x) { return x[j]; };
  f.grad = [n, j](const Vec&) {
    Vec g(n, 0.0);
    g[j] = 1.0;
    return g;
  };
  f.hess = [n](const Vec&) { return Mat(n, n, 0.0); };
  return f;
}

SmoothFn squared_distance_fn(Vec anchor) {
  const int n = static_cast<int>(anchor.size());
  SmoothFn f;
  f.value = [anchor](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < anchor.size(); ++i) s += (x[i] - anchor[i]) * (x[i] - anchor[i]);
    return s;
  };
  f.grad = [anchor](const Vec& x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < anchor.size(); ++i) g[i] = 2.0 * (x[i] - anchor[i]);
    return g;
  };
  f.hess = [n](const Vec&) { return scaled(Mat::identity(n), 2.0); };
  return f;
}

void finish_cone_fields(ProblemSpec& p) {
  auto inv = invert(p.cone_G);
  if (!inv) fail(ErrorKind::InvalidArgument, "cone matrix not invertible");
  p.cone_G_inv = *inv;
}

}  // namespace

ProblemSpec make_ball(int q) {
  if (q < 2 || q > 4) fail(ErrorKind::Capability, "ball problem supports q in {2,3,4}");
  ProblemSpec p;
  p.name = "ball" + std::to_string(q);
  p.q = q;
  p.n = q;
  for (int j = 0; j < q; ++j) p.objectives.push_back(coordinate_fn(q, j));

  Vec center(q, 1.0);
  SmoothFn ball;
  ball.value = [center](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
    return s - 1.0;
  };
  ball.grad = [center](const Vec& x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < center.size(); ++i) g[i] = 2.0 * (x[i] - center[i]);
    return g;
  };
  ball.hess = [q](const Vec&) { return scaled(Mat::identity(q), 2.0); };
  p.feasible_set.push_back(std::move(ball));

  p.x0 = center;
  p.cone_G = Mat::identity(q);
  p.w_bar = Vec(q, 1.0);
  // support of the ball in direction w_bar, padded by one
  p.slice_level = static_cast<double>(q) + std::sqrt(static_cast<double>(q)) + 1.0;
  p.c_int = Vec(q, 1.0);
  p.oracle_tag = p.name;
  p.sampler_tag = "ball";
  finish_cone_fields(p);
  return p;
}

ProblemSpec make_example2() {
  ProblemSpec p;
  p.name = "example2";
  p.q = 3;
  p.n = 2;
  const std::vector<Vec> anchors = {{1.0, 1.0}, {2.0, 3.0}, {4.0, 2.0}};
  for (const auto& a : anchors) p.objectives.push_back(squared_distance_fn(a));

  p.feasible_set.push_back(linear_fn({1.0, 2.0}, -10.0));   // x1 + 2 x2 <= 10
  p.feasible_set.push_back(linear_fn({-1.0, 0.0}, 0.0));    // x1 >= 0
  p.feasible_set.push_back(linear_fn({1.0, 0.0}, -10.0));   // x1 <= 10
  p.feasible_set.push_back(linear_fn({0.0, -1.0}, 0.0));    // x2 >= 0
  p.feasible_set.push_back(linear_fn({0.0, 1.0}, -4.0));    // x2 <= 4

  p.x0 = {2.0, 2.0};
  p.cone_G = Mat::identity(3);
  p.w_bar = Vec(3, 1.0);
  p.c_int = Vec(3, 1.0);

  // the slice offset maximizes a convex function over X, attained at a vertex
  static const double beta = [] {
    std::vector<Halfspace> hs;
    hs.emplace_back(Vec{-1.0, -2.0}, -10.0);
    hs.emplace_back(Vec{1.0, 0.0}, 0.0);
    hs.emplace_back(Vec{-1.0, 0.0}, -10.0);
    hs.emplace_back(Vec{0.0, 1.0}, 0.0);
    hs.emplace_back(Vec{0.0, -1.0}, -4.0);
    Polytope x_set(std::move(hs));
    const std::vector<Vec> anchors2 = {{1.0, 1.0}, {2.0, 3.0}, {4.0, 2.0}};
    double best = 0.0;
    for (const auto& v : x_set.vertices()) {
      double s = 0.0;
      for (const auto& a : anchors2)
        s += (v[0] - a[0]) * (v[0] - a[0]) + (v[1] - a[1]) * (v[1] - a[1]);
      best = std::max(best, s);
    }
    return best;
  }();
  p.slice_level = beta + 1.0;
  p.oracle_tag = p.name;
  p.sampler_tag = "example2";
  finish_cone_fields(p);
  return p;
}

namespace {

bool jahn_feasible(double x1, double x2) {
  return x1 * x1 - x2 <= 0.0 && x1 + 2.0 * x2 - 3.0 <= 0.0;
}

double jahn_beta() {
  // maximize w_bar . Gamma = x2^2 over X: dense grid then compass polish
  static const double cached = [] {
    double best = -1.0;
    double bx1 = 0.0, bx2 = 0.0;
    const double step = 1e-3;
    for (double x1 = -1.5; x1 <= 1.0 + 1e-12; x1 += step) {
      for (double x2 = 0.0; x2 <= 2.25 + 1e-12; x2 += step) {
        if (!jahn_feasible(x1, x2)) continue;
        double v = x2 * x2;
        if (v > best) {
          best = v;
          bx1 = x1;
          bx2 = x2;
        }
      }
    }
    double h = step;
    while (h > 1e-10) {
      bool moved = false;
      const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
      for (const auto& d : dirs) {
        double t1 = bx1 + h * d[0], t2 = bx2 + h * d[1];
        if (!jahn_feasible(t1, t2)) continue;
        double v = t2 * t2;
        if (v > best + 1e-15) {
          best = v;
          bx1 = t1;
          bx2 = t2;
          moved = true;
          break;
        }
      }
      if (!moved) h *= 0.5;
    }
    return best;
  }();
  return cached;
}

}  // namespace

ProblemSpec make_jahn() {
  ProblemSpec p;
  p.name = "jahn";
  p.q = 2;
  p.n = 2;

  p.objectives.push_back(linear_fn({-1.0, 0.0}, 0.0));  // -x1
  SmoothFn f2;
  f2.value = [](const Vec& x) { return x[0] + x[1] * x[1]; };
  f2.grad = [](const Vec& x) { return Vec{1.0, 2.0 * x[1]}; };
  f2.hess = [](const Vec&) {
    Mat h(2, 2, 0.0);
    h(1, 1) = 2.0;
    return h;
  };
  p.objectives.push_back(std::move(f2));

  SmoothFn g1;
  g1.value = [](const Vec& x) { return x[0] * x[0] - x[1]; };
  g1.grad = [](const Vec& x) { return Vec{2.0 * x[0], -1.0}; };
  g1.hess = [](const Vec&) {
    Mat h(2, 2, 0.0);
    h(0, 0) = 2.0;
    return h;
  };
  p.feasible_set.push_back(std::move(g1));
  p.feasible_set.push_back(linear_fn({1.0, 2.0}, -3.0));

  p.x0 = {0.0, 0.5};
  p.cone_G = Mat::identity(2);
  p.w_bar = Vec(2, 1.0);
  p.slice_level = jahn_beta() + 1.0;
  p.c_int = Vec(2, 1.0);
  p.oracle_tag = p.name;
  p.sampler_tag = "jahn";
  finish_cone_fields(p);
  return p;
}

ProblemSpec by_name(const std::string& name) {
  if (name == "ball2") return make_ball(2);
  if (name == "ball3") return make_ball(3);
  if (name == "ball4") return make_ball(4);
  if (name == "example2") return make_example2();
  if (name == "jahn") return make_jahn();
  fail(ErrorKind::Capability, "unknown problem '" + name + "'");
}

ProblemSpec transform_problem(const ProblemSpec& p, const SpdMatrix& t) {
  if (t.dim() != p.q) fail(ErrorKind::InvalidArgument, "transform dimension mismatch");
  ProblemSpec out;
  out.name = p.name + "~T";
  out.q = p.q;
  out.n = p.n;
  out.feasible_set = p.feasible_set;
  out.x0 = p.x0;

  // each transformed component is a fixed linear combination of the originals
  auto base = std::make_shared<std::vector<SmoothFn>>(p.objectives);
  for (int j = 0; j < p.q; ++j) {
    Vec weights = t.entries().row(j);
    SmoothFn f;
    f.value = [base, weights](const Vec& x) {
      double s = 0.0;
      for (std::size_t l = 0; l < weights.size(); ++l)
        if (weights[l] != 0.0) s += weights[l] * (*base)[l].value(x);
      return s;
    };
    f.grad = [base, weights, n = p.n](const Vec& x) {
      Vec g(n, 0.0);
      for (std::size_t l = 0; l < weights.size(); ++l)
        if (weights[l] != 0.0) axpy(weights[l], (*base)[l].grad(x), g);
      return g;
    };
    f.hess = [base, weights, n = p.n](const Vec& x) {
      Mat h(n, n, 0.0);
      for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l] == 0.0) continue;
        Mat hl = (*base)[l].hess(x);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) h(a, b) += weights[l] * hl(a, b);
      }
      return h;
    };
    out.objectives.push_back(std::move(f));
  }

  SpdMatrix t_inv = inverse_spd(t);
  out.cone_G = matmul(p.cone_G, t_inv.entries());
  out.cone_G_inv = matmul(t.entries(), p.cone_G_inv);
  out.w_bar = matvec(t_inv.entries(), p.w_bar);
  out.slice_level = p.slice_level;
  out.c_int = matvec(t.entries(), p.c_int);
  out.oracle_tag.clear();
  out.sampler_tag = p.sampler_tag;
  return out;
}

// ---------------------------------------------------------------------------
// brute-force distance oracle
// ---------------------------------------------------------------------------

namespace {

// exact minimization over c >= 0, w_bar.(p+c) <= gamma of ||p + c - v||_M,
// by enumerating active sets of the strictly convex QP (q <= 4)
double cone_completion_distance(const ProblemSpec& p, const SpdMatrix& m, const Vec& pt, const Vec& v) {
  const int q = p.q;
  Vec r = diff(pt, v);
  const double slice_slack = p.slice_level - dot(p.w_bar, pt);
  // candidates collect feasible stationary points of every active set; the
  // minimizer's own active set is among them, so the min is exact
  double best = m_norm(m, r);  // c = 0, feasible since pt is strictly inside the slice
  Vec mr = matvec(m.entries(), r);

  for (int mask = 1; mask < (1 << q); ++mask) {
    std::vector<int> free_idx;
    for (int j = 0; j < q; ++j)
      if (mask & (1 << j)) free_idx.push_back(j);
    const int f = static_cast<int>(free_idx.size());

    for (int slice_active = 0; slice_active <= 1; ++slice_active) {
      const int dim = f + slice_active;
      Mat a(dim, dim, 0.0);
      Vec b(dim, 0.0);
      for (int i = 0; i < f; ++i) {
        for (int j = 0; j < f; ++j) a(i, j) = m(free_idx[i], free_idx[j]);
        b[i] = -mr[free_idx[i]];
        if (slice_active) {
          a(i, f) = p.w_bar[free_idx[i]];
          a(f, i) = p.w_bar[free_idx[i]];
        }
      }
      if (slice_active) b[f] = slice_slack;
      auto sol = lu_solve(a, b);
      if (!sol) continue;
      Vec c(q, 0.0);
      bool ok = true;
      for (int i = 0; i < f; ++i) {
        double ci = (*sol)[i];
        if (ci < -1e-10) {
          ok = false;
          break;
        }
        c[free_idx[i]] = std::max(0.0, ci);
      }
      if (!ok) continue;
      if (dot(p.w_bar, c) > slice_slack + 1e-10) continue;
      Vec rc = sum(r, c);
      best = std::min(best, m_norm(m, rc));
    }
  }
  return best;
}

struct CompassDirs {
  std::vector<Vec> dirs;
  explicit CompassDirs(int q) {
    for (int i = 0; i < q; ++i) {
      Vec d(q, 0.0);
      d[i] = 1.0;
      dirs.push_back(d);
      d[i] = -1.0;
      dirs.push_back(d);
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < q; ++i)
      for (int j = i + 1; j < q; ++j)
        for (int si = -1; si <= 1; si += 2)
          for (int sj = -1; sj <= 1; sj += 2) {
            Vec d(q, 0.0);
            d[i] = si * inv_sqrt2;
            d[j] = sj * inv_sqrt2;
            dirs.push_back(d);
          }
  }
};

// feasible-point pattern search for a convex objective over a convex
// membership set; first-improvement moves, halving steps
template <class Member, class Objective>
std::pair<Vec, double> compass_minimize(const Vec& start, double h0, double h_min, const Member& member,
                                        const Objective& f, const Vec* pull_target = nullptr) {
  const int q = static_cast<int>(start.size());
  CompassDirs cd(q);
  Vec y = start;
  double fy = f(y);
  double h = h0;
  int guard = 0;
  while (h > h_min && ++guard < 200000) {
    bool improved = false;
    auto try_move = [&](const Vec& d) {
      Vec yt = y;
      axpy(h, d, yt);
      if (!member(yt)) return false;
      double ft = f(yt);
      if (ft < fy - 1e-15) {
        y = std::move(yt);
        fy = ft;
        return true;
      }
      return false;
    };
    if (pull_target) {
      Vec d = diff(*pull_target, y);
      double nd = norm2(d);
      if (nd > 1e-14) improved = try_move(scaled(d, 1.0 / nd));
    }
    if (!improved)
      for (const auto& d : cd.dirs)
        if (try_move(d)) {
          improved = true;
          break;
        }
    if (!improved) h *= 0.5;
  }
  return {y, fy};
}

double oracle_ball(const ProblemSpec& p, const Vec& v, const SpdMatrix& m) {
  const int q = p.q;
  const Vec center(q, 1.0);
  auto member = [&](const Vec& y) {
    double s = 0.0;
    for (int i = 0; i < q; ++i) {
      double d = std::min(y[i] - center[i], 0.0);
      s += d * d;
    }
    return std::sqrt(s) <= 1.0 + 1e-12 && dot(p.w_bar, y) <= p.slice_level + 1e-12;
  };
  if (member(v)) return 0.0;
  auto f = [&](const Vec& y) { return m_norm(m, diff(y, v)); };

  // walk from the center toward v to the membership boundary for a start
  Vec dir = diff(v, center);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    Vec y = center;
    axpy(mid, dir, y);
    (member(y) ? lo : hi) = mid;
  }
  Vec boundary = center;
  axpy(lo, dir, boundary);

  auto r1 = compass_minimize(boundary, 0.5, 1e-9, member, f, &v);
  auto r2 = compass_minimize(center, 0.5, 1e-9, member, f, &v);
  return std::min(r1.second, r2.second);
}

struct GridSpec {
  double x1_lo, x1_hi, x2_lo, x2_hi;
  int n1, n2;
};

double oracle_planar(const ProblemSpec& p, const Vec& v, const SpdMatrix& m, const GridSpec& gs) {
  const bool identity_m = [&] {
    for (int i = 0; i < p.q; ++i)
      for (int j = 0; j < p.q; ++j)
        if (std::abs(m(i, j) - (i == j ? 1.0 : 0.0)) > 0.0) return false;
    return true;
  }();

  auto feasible = [&](const Vec& x) {
    for (const auto& c : p.feasible_set)
      if (c.value(x) > 1e-12) return false;
    return true;
  };
  auto point_dist = [&](const Vec& x) { return cone_completion_distance(p, m, p.objective_value(x), v); };

  double best = std::numeric_limits<double>::infinity();
  Vec best_x = p.x0;
  const int stride = identity_m ? 1 : 8;  // general-M per-point cost is ~30x higher
  const double h1 = (gs.x1_hi - gs.x1_lo) / gs.n1;
  const double h2 = (gs.x2_hi - gs.x2_lo) / gs.n2;
  for (int i = 0; i <= gs.n1; i += stride) {
    for (int j = 0; j <= gs.n2; j += stride) {
      Vec x = {gs.x1_lo + i * h1, gs.x2_lo + j * h2};
      if (!feasible(x)) continue;
      double d;
      if (identity_m) {
        // closed-form cone completion: y = max(Gamma(x), v) componentwise
        Vec g = p.objective_value(x);
        double s = 0.0;
        for (int l = 0; l < p.q; ++l) {
          double dl = std::max(g[l] - v[l], 0.0);
          s += dl * dl;
        }
        Vec y(g);
        for (int l = 0; l < p.q; ++l) y[l] = std::max(g[l], v[l]);
        d = (dot(p.w_bar, y) <= p.slice_level + 1e-12) ? std::sqrt(s) : point_dist(x);
      } else {
        d = point_dist(x);
      }
      if (d < best) {
        best = d;
        best_x = x;
      }
    }
  }

  auto refined = compass_minimize(best_x, std::max(h1, h2) * stride, 1e-9, feasible, point_dist);
  return std::min(best, refined.second);
}

}  // namespace

double oracle_distance(const ProblemSpec& p, const Vec& v, const SpdMatrix& m) {
  if (p.oracle_tag == "ball2" || p.oracle_tag == "ball3" || p.oracle_tag == "ball4")
    return oracle_ball(p, v, m);
  if (p.oracle_tag == "example2")
    return oracle_planar(p, v, m, {0.0, 10.0, 0.0, 4.0, 1600, 1040});
  if (p.oracle_tag == "jahn")
    return oracle_planar(p, v, m, {-1.5, 1.0, 0.0, 2.25, 1600, 1600});
  fail(ErrorKind::Capability, "oracle_distance supports the built-in benchmarks only");
}

Vec sample_feasible_point(const ProblemSpec& p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (p.sampler_tag == "ball") {
    const int n = p.n;
    Vec u(n);
    double nn = 0.0;
    do {
      for (int i = 0; i < n; ++i) u[i] = gauss(rng);
      nn = norm2(u);
    } while (nn < 1e-12);
    double r = std::pow(unif(rng), 1.0 / n);
    Vec x(n, 1.0);
    axpy(r / nn, u, x);
    return x;
  }
  auto rejection = [&](double x1_lo, double x1_hi, double x2_lo, double x2_hi) {
    for (int tries = 0; tries < 100000; ++tries) {
      Vec x = {x1_lo + unif(rng) * (x1_hi - x1_lo), x2_lo + unif(rng) * (x2_hi - x2_lo)};
      bool ok = true;
      for (const auto& c : p.feasible_set)
        if (c.value(x) > 0.0) {
          ok = false;
          break;
        }
      if (ok) return x;
    }
    fail(ErrorKind::Capability, "rejection sampler failed");
  };
  if (p.sampler_tag == "example2") return rejection(0.0, 10.0, 0.0, 4.0);
  if (p.sampler_tag == "jahn") return rejection(-1.5, 1.0, 0.0, 2.25);
  fail(ErrorKind::Capability, "sampler supports the built-in benchmarks only");
}

Vec sample_slice_point(const ProblemSpec& p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec x = sample_feasible_point(p, rng);
  Vec y0 = p.objective_value(x);
  for (int tries = 0; tries < 1000; ++tries) {
    Vec u(p.q);
    for (int i = 0; i < p.q; ++i) u[i] = std::abs(gauss(rng));
    Vec c_dir = matvec(p.cone_G_inv, u);
    double denom = dot(p.w_bar, c_dir);
    if (denom <= 1e-12) continue;
    double t_max = (p.slice_level - dot(p.w_bar, y0)) / denom;
    Vec y = y0;
    axpy(unif(rng) * t_max, c_dir, y);
    return y;
  }
  fail(ErrorKind::Capability, "slice sampler failed");
}

}  // namespace vopt
