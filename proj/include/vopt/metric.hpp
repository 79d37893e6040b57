#pragma once

#include <utility>

#include "vopt/linalg.hpp"

namespace vopt {

/// Symmetric positive definite matrix with cached extreme eigenvalues.
/// Construction validates symmetry (1e-12) and positive definiteness.
class SpdMatrix {
 public:
  explicit SpdMatrix(Mat entries);
  static SpdMatrix identity(int q);

  int dim() const { return entries_.rows(); }
  const Mat& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

 private:
  Mat entries_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

struct Spectral {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double theta = 0.0;  // sqrt(lambda_min / lambda_max), in (0, 1]
};

Spectral spectral(const SpdMatrix& m);

/// Unique SPD square root T with T*T = M.
SpdMatrix sqrt_factor(const SpdMatrix& m);

SpdMatrix inverse_spd(const SpdMatrix& m);

/// ||y||_M = sqrt(y' M y)
double m_norm(const SpdMatrix& m, const Vec& y);

/// ||u||_{M^-1} = sqrt(u' M^-1 u), via a small solve
double m_inv_norm(const SpdMatrix& m, const Vec& u);

/// Running second-moment state of normalized cut-normals:
/// M_k = eps0*I + Sigma_k with Sigma_k = (1/k) sum u_i u_i'. Before any
/// normal is pushed the isotropic prior Sigma_0 = I/q is used, so iteration
/// zero behaves like a scaled Euclidean step.
class MetricState {
 public:
  MetricState(int q, double eps0);

  int dim() const { return q_; }
  int count() const { return k_; }
  double eps0() const { return eps0_; }
  const Mat& sum_outer() const { return sum_outer_; }

  /// State with w/||w|| accumulated (ZeroNormal if ||w|| <= 1e-12).
  MetricState pushed(const Vec& w) const;

  SpdMatrix materialize() const;

  /// Extreme eigenvalues of Sigma_k; NoNormalsYet when k = 0.
  std::pair<double, double> sigma_stats() const;

 private:
  int q_;
  double eps0_;
  int k_ = 0;
  Mat sum_outer_;
  Mat prior_;
};

// free-function spellings used throughout the engine
inline MetricState push_normal(const MetricState& s, const Vec& w) { return s.pushed(w); }
inline SpdMatrix materialize(const MetricState& s) { return s.materialize(); }
inline std::pair<double, double> sigma_stats(const MetricState& s) { return s.sigma_stats(); }

}  // namespace vopt
