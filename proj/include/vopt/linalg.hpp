#pragma once

#include <optional>
#include <vector>

namespace vopt {

using Vec = std::vector<double>;

/// Dense row-major matrix. Sizes in this library are small (objective
/// dimension q <= 4, decision dimension n <= 4, Newton systems n+q+1),
/// except the simplex tableau which manages its own storage.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static Mat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Vec row(int i) const;
  const std::vector<double>& data() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// vector helpers
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec scaled(const Vec& a, double s);
Vec sum(const Vec& a, const Vec& b);
Vec diff(const Vec& a, const Vec& b);
void axpy(double a, const Vec& x, Vec& y);  // y += a*x
bool lex_less(const Vec& a, const Vec& b);

// matrix helpers
Vec matvec(const Mat& a, const Vec& x);
Vec matvec_t(const Mat& a, const Vec& x);  // A^T x
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat outer(const Vec& a, const Vec& b);
Mat sum(const Mat& a, const Mat& b);
Mat scaled(const Mat& a, double s);
double max_abs_asymmetry(const Mat& a);

/// Gaussian elimination with partial pivoting; nullopt on (near-)singular
/// systems so callers can skip degenerate constraint subsets.
std::optional<Vec> lu_solve(Mat a, Vec b);
std::optional<Mat> invert(const Mat& a);

/// Cholesky solve for symmetric positive definite systems; nullopt when the
/// factorization hits a non-positive pivot.
std::optional<Vec> cholesky_solve(Mat a, Vec b);

struct EigenSym {
  Vec values;   // ascending
  Mat vectors;  // columns are eigenvectors, matching values
};

/// Cyclic Jacobi eigendecomposition for small symmetric matrices. Sweeps
/// until the off-diagonal Frobenius norm drops below off_tol.
EigenSym jacobi_eigen(const Mat& sym, double off_tol = 1e-13);

}  // namespace vopt
