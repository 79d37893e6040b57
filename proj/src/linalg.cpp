#include "vopt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "vopt/errors.hpp"

namespace vopt {

Mat Mat::identity(int n) {
  Mat m(n, n, 0.0);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec Mat::row(int i) const {
  Vec r(cols_);
  for (int j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
  return r;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

Vec scaled(const Vec& a, double s) {
  Vec r(a);
  for (double& x : r) x *= s;
  return r;
}

Vec sum(const Vec& a, const Vec& b) {
  Vec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vec diff(const Vec& a, const Vec& b) {
  Vec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

bool lex_less(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

Vec matvec(const Mat& a, const Vec& x) {
  Vec r(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  Vec r(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r[j] += a(i, j) * x[i];
  return r;
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat r(a.rows(), b.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

Mat transpose(const Mat& a) {
  Mat r(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

Mat outer(const Vec& a, const Vec& b) {
  Mat r(static_cast<int>(a.size()), static_cast<int>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r(static_cast<int>(i), static_cast<int>(j)) = a[i] * b[j];
  return r;
}

Mat sum(const Mat& a, const Mat& b) {
  Mat r(a);
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) r(i, j) += b(i, j);
  return r;
}

Mat scaled(const Mat& a, double s) {
  Mat r(a);
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) r(i, j) *= s;
  return r;
}

double max_abs_asymmetry(const Mat& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - a(j, i)));
  return m;
}

std::optional<Vec> lu_solve(Mat a, Vec b) {
  const int n = a.rows();
  if (n != a.cols() || static_cast<int>(b.size()) != n) fail(ErrorKind::InvalidArgument, "lu_solve: shape mismatch");
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  const double tol = 1e-12 * std::max(1.0, scale);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= tol) return std::nullopt;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

std::optional<Mat> invert(const Mat& a) {
  const int n = a.rows();
  Mat inv(n, n);
  for (int j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    auto col = lu_solve(a, e);
    if (!col) return std::nullopt;
    for (int i = 0; i < n; ++i) inv(i, j) = (*col)[i];
  }
  return inv;
}

std::optional<Vec> cholesky_solve(Mat a, Vec b) {
  const int n = a.rows();
  // in-place lower factor
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (d <= 0.0 || !std::isfinite(d)) return std::nullopt;
    double lj = std::sqrt(d);
    a(j, j) = lj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / lj;
    }
  }
  // forward then backward substitution
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
    b[i] = s / a(i, i);
  }
  return b;
}

namespace {

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenSym jacobi_eigen(const Mat& sym, double off_tol) {
  const int n = sym.rows();
  Mat a(sym);
  Mat v = Mat::identity(n);
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a) > off_tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= off_tol * 1e-3) continue;
        double app = a(p, p), aqq = a(q, q);
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  // sort ascending by eigenvalue, reordering columns
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  EigenSym out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(idx[j], idx[j]);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, idx[j]);
  }
  return out;
}

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Capability: return "capability error";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Unbounded: return "unbounded";
    case ErrorKind::NotNested: return "not nested";
    case ErrorKind::ZeroNormal: return "zero normal";
    case ErrorKind::NotSpd: return "not spd";
    case ErrorKind::NoNormalsYet: return "no normals yet";
    case ErrorKind::DegenerateCut: return "degenerate cut";
    case ErrorKind::MaxIter: return "max iterations";
    case ErrorKind::UnboundedInit: return "unbounded initialization";
    case ErrorKind::NoVertices: return "no vertices";
    case ErrorKind::TooFewPoints: return "too few points";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Io: return "io error";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

}  // namespace vopt
