#include "vopt/metric.hpp"

#include <cmath>

#include "vopt/errors.hpp"

namespace vopt {

SpdMatrix::SpdMatrix(Mat entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) fail(ErrorKind::NotSpd, "matrix not square");
  if (max_abs_asymmetry(entries_) > 1e-12) fail(ErrorKind::NotSpd, "matrix not symmetric");
  EigenSym e = jacobi_eigen(entries_);
  lambda_min_ = e.values.front();
  lambda_max_ = e.values.back();
  if (!(lambda_min_ > 0.0)) fail(ErrorKind::NotSpd, "matrix not positive definite");
}

SpdMatrix SpdMatrix::identity(int q) { return SpdMatrix(Mat::identity(q)); }

Spectral spectral(const SpdMatrix& m) {
  Spectral s;
  s.lambda_min = m.lambda_min();
  s.lambda_max = m.lambda_max();
  s.theta = std::sqrt(s.lambda_min / s.lambda_max);
  return s;
}

SpdMatrix sqrt_factor(const SpdMatrix& m) {
  const int q = m.dim();
  EigenSym e = jacobi_eigen(m.entries());
  Mat t(q, q, 0.0);
  for (int k = 0; k < q; ++k) {
    double s = std::sqrt(e.values[k]);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) t(i, j) += s * e.vectors(i, k) * e.vectors(j, k);
  }
  // symmetrize away eigensolver roundoff
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      double v = 0.5 * (t(i, j) + t(j, i));
      t(i, j) = v;
      t(j, i) = v;
    }
  return SpdMatrix(std::move(t));
}

SpdMatrix inverse_spd(const SpdMatrix& m) {
  const int q = m.dim();
  EigenSym e = jacobi_eigen(m.entries());
  Mat t(q, q, 0.0);
  for (int k = 0; k < q; ++k) {
    double s = 1.0 / e.values[k];
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) t(i, j) += s * e.vectors(i, k) * e.vectors(j, k);
  }
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      double v = 0.5 * (t(i, j) + t(j, i));
      t(i, j) = v;
      t(j, i) = v;
    }
  return SpdMatrix(std::move(t));
}

double m_norm(const SpdMatrix& m, const Vec& y) {
  double s = dot(y, matvec(m.entries(), y));
  return std::sqrt(std::max(0.0, s));
}

double m_inv_norm(const SpdMatrix& m, const Vec& u) {
  auto sol = cholesky_solve(m.entries(), u);
  if (!sol) fail(ErrorKind::NotSpd, "m_inv_norm: factorization failed");
  return std::sqrt(std::max(0.0, dot(u, *sol)));
}

MetricState::MetricState(int q, double eps0)
    : q_(q), eps0_(eps0), sum_outer_(q, q, 0.0), prior_(q, q, 0.0) {
  if (q < 1) fail(ErrorKind::InvalidArgument, "metric dimension must be positive");
  if (!(eps0 > 0.0)) fail(ErrorKind::InvalidArgument, "eps0 must be positive");
  for (int i = 0; i < q; ++i) prior_(i, i) = 1.0 / q;
}

MetricState MetricState::pushed(const Vec& w) const {
  double n = norm2(w);
  if (n <= 1e-12) fail(ErrorKind::ZeroNormal, "cut normal too small");
  MetricState next(*this);
  Vec u = scaled(w, 1.0 / n);
  for (int i = 0; i < q_; ++i)
    for (int j = 0; j < q_; ++j) next.sum_outer_(i, j) += u[i] * u[j];
  next.k_ = k_ + 1;
  return next;
}

SpdMatrix MetricState::materialize() const {
  Mat m(q_, q_, 0.0);
  const Mat& sigma_src = (k_ == 0) ? prior_ : sum_outer_;
  const double inv_k = (k_ == 0) ? 1.0 : 1.0 / k_;
  for (int i = 0; i < q_; ++i)
    for (int j = 0; j < q_; ++j) m(i, j) = inv_k * sigma_src(i, j);
  for (int i = 0; i < q_; ++i) m(i, i) += eps0_;
  return SpdMatrix(std::move(m));
}

std::pair<double, double> MetricState::sigma_stats() const {
  if (k_ == 0) fail(ErrorKind::NoNormalsYet, "sigma_stats requires at least one normal");
  Mat sigma = scaled(sum_outer_, 1.0 / k_);
  EigenSym e = jacobi_eigen(sigma);
  return {e.values.front(), e.values.back()};
}

}  // namespace vopt
