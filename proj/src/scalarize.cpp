#include "vopt/scalarize.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "vopt/errors.hpp"

namespace vopt {

namespace {

// lift an x-space constraint to the (x, z) variable block
SmoothFn lift_to_xz(const SmoothFn& f, int n, int q) {
  SmoothFn out;
  out.value = [f, n](const Vec& u) { return f.value(Vec(u.begin(), u.begin() + n)); };
  out.grad = [f, n, q](const Vec& u) {
    Vec g = f.grad(Vec(u.begin(), u.begin() + n));
    g.resize(n + q, 0.0);
    return g;
  };
  out.hess = [f, n, q](const Vec& u) {
    Mat hx = f.hess(Vec(u.begin(), u.begin() + n));
    Mat h(n + q, n + q, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = hx(i, j);
    return h;
  };
  return out;
}

// row j of the cone feasibility block: (G (Gamma(x) - z - v))_j <= 0,
// convex in (x, z) by C-convexity of the objective map
SmoothFn cone_row(const std::shared_ptr<ProblemSpec>& p, const Vec& v, int j) {
  const int n = p->n, q = p->q;
  Vec weights = p->cone_G.row(j);
  double shift = -dot(weights, v);
  SmoothFn out;
  out.value = [p, weights, shift, n, q](const Vec& u) {
    Vec x(u.begin(), u.begin() + n);
    Vec g = p->objective_value(x);
    double s = shift;
    for (int l = 0; l < q; ++l) s += weights[l] * (g[l] - u[n + l]);
    return s;
  };
  out.grad = [p, weights, n, q](const Vec& u) {
    Vec x(u.begin(), u.begin() + n);
    Vec g(n + q, 0.0);
    for (int l = 0; l < q; ++l) {
      if (weights[l] != 0.0) {
        Vec gl = p->objectives[l].grad(x);
        for (int i = 0; i < n; ++i) g[i] += weights[l] * gl[i];
      }
      g[n + l] = -weights[l];
    }
    return g;
  };
  out.hess = [p, weights, n, q](const Vec& u) {
    Vec x(u.begin(), u.begin() + n);
    Mat h(n + q, n + q, 0.0);
    for (int l = 0; l < q; ++l) {
      if (weights[l] == 0.0) continue;
      Mat hl = p->objectives[l].hess(x);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) h(a, b) += weights[l] * hl(a, b);
    }
    return h;
  };
  return out;
}

}  // namespace

ScalarizationResult solve_norm_min(const ProblemSpec& p, const Vec& v, const SpdMatrix& m, double tol) {
  const int n = p.n, q = p.q;
  if (static_cast<int>(v.size()) != q) fail(ErrorKind::InvalidArgument, "reference point dimension");
  auto ps = std::make_shared<ProblemSpec>(p);

  ConvexProgram prog;
  prog.n_vars = n + q;
  // objective 1/2 z' M z
  Mat mm = m.entries();
  prog.objective.value = [mm, n](const Vec& u) {
    Vec z(u.begin() + n, u.end());
    return 0.5 * dot(z, matvec(mm, z));
  };
  prog.objective.grad = [mm, n, q](const Vec& u) {
    Vec z(u.begin() + n, u.end());
    Vec mz = matvec(mm, z);
    Vec g(n + q, 0.0);
    for (int l = 0; l < q; ++l) g[n + l] = mz[l];
    return g;
  };
  prog.objective.hess = [mm, n, q](const Vec&) {
    Mat h(n + q, n + q, 0.0);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) h(n + a, n + b) = mm(a, b);
    return h;
  };

  for (int j = 0; j < q; ++j) prog.constraints.push_back(cone_row(ps, v, j));
  for (const auto& f : p.feasible_set) prog.constraints.push_back(lift_to_xz(f, n, q));
  {
    // slice: w_bar.(v + z) <= gamma
    Vec coeff(n + q, 0.0);
    for (int l = 0; l < q; ++l) coeff[n + l] = p.w_bar[l];
    prog.constraints.push_back(linear_fn(coeff, dot(p.w_bar, v) - p.slice_level));
  }

  // start z0 = Gamma(x0) - v + delta * c_int, with delta small enough to
  // stay strictly inside the slice cap
  Vec gx0 = p.objective_value(p.x0);
  double margin = p.slice_level - dot(p.w_bar, gx0);
  double wc = dot(p.w_bar, p.c_int);
  double delta = std::min(1.0, 0.5 * margin / std::max(wc, 1e-300));
  Vec u0(n + q, 0.0);
  for (int i = 0; i < n; ++i) u0[i] = p.x0[i];
  for (int l = 0; l < q; ++l) u0[n + l] = gx0[l] - v[l] + delta * p.c_int[l];
  bool strict = true;
  for (const auto& c : prog.constraints)
    if (c.value(u0) >= -1e-12) strict = false;
  if (strict) prog.start = u0;  // otherwise phase-I takes over

  BarrierResult br = barrier_solve(prog, tol);

  ScalarizationResult res;
  res.x_star.assign(br.x.begin(), br.x.begin() + n);
  res.z_star.assign(br.x.begin() + n, br.x.end());
  res.value = m_norm(m, res.z_star);
  res.y_boundary = sum(v, res.z_star);
  res.y_image = p.objective_value(res.x_star);
  res.status = SolveStatus::Optimal;
  if (res.value > kSeparationThreshold) {
    res.cut_normal = scaled(matvec(m.entries(), res.z_star), 1.0 / res.value);
  }
  return res;
}

WeightedSumResult weighted_sum(const ProblemSpec& p, const Vec& omega, double tol) {
  if (norm2(omega) <= 1e-12) fail(ErrorKind::InvalidArgument, "weight vector must be nonzero");
  // omega in C+ iff G^-T omega >= 0 componentwise
  Vec mu = matvec_t(p.cone_G_inv, omega);
  for (double c : mu)
    if (c < -1e-9) fail(ErrorKind::InvalidArgument, "weight vector outside the dual cone");

  auto ps = std::make_shared<ProblemSpec>(p);
  ConvexProgram prog;
  prog.n_vars = p.n;
  prog.objective.value = [ps, omega](const Vec& x) { return dot(omega, ps->objective_value(x)); };
  prog.objective.grad = [ps, omega](const Vec& x) { return matvec_t(ps->objective_jacobian(x), omega); };
  prog.objective.hess = [ps, omega, n = p.n](const Vec& x) {
    Mat h(n, n, 0.0);
    for (int l = 0; l < ps->q; ++l) {
      if (omega[l] == 0.0) continue;
      Mat hl = ps->objectives[l].hess(x);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) h(a, b) += omega[l] * hl(a, b);
    }
    return h;
  };
  prog.constraints = p.feasible_set;
  bool strict = true;
  for (const auto& c : prog.constraints)
    if (c.value(p.x0) >= -1e-12) strict = false;
  if (strict) prog.start = p.x0;

  BarrierResult br = barrier_solve(prog, tol);
  WeightedSumResult res;
  res.x_star = br.x;
  res.support = dot(omega, p.objective_value(br.x));
  return res;
}

Halfspace extract_cut(const ScalarizationResult& r, CutPoint mode) {
  if (!r.cut_normal || r.value <= kSeparationThreshold)
    fail(ErrorKind::DegenerateCut, "reference point already inside the slice");
  const Vec& y = (mode == CutPoint::ImagePoint) ? r.y_image : r.y_boundary;
  return Halfspace(*r.cut_normal, dot(*r.cut_normal, y));
}

}  // namespace vopt
