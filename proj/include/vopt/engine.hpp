#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vopt/metric.hpp"
#include "vopt/polytope.hpp"
#include "vopt/problems.hpp"
#include "vopt/scalarize.hpp"
#include "vopt/trace.hpp"

namespace vopt {

enum class NormMode { Euclidean, FixedM, Adaptive };
enum class Strategy { Full, LpProbe, Hybrid };
enum class RunStatus { ConvergedEuclidean, ConvergedSurrogate, MaxIterReached };

const char* to_string(NormMode m);
const char* to_string(Strategy s);
const char* to_string(RunStatus s);

struct RunConfig {
  std::string problem;
  NormMode norm = NormMode::Euclidean;
  std::optional<SpdMatrix> fixed_m;  // required for NormMode::FixedM
  double eps0 = 0.1;
  double eps = 1e-4;
  int max_iter = 500;
  Strategy strategy = Strategy::Full;
  int hybrid_period = 50;
  CutPoint cut_point = CutPoint::ImagePoint;
  std::string trace_path;                   // empty: trace kept in memory only
  std::string rate_window = "second-half";  // fit window rule recorded in the trace
  bool cut_ratio_diag = true;
  std::uint64_t audit_seed = 0xc0ffee5eedULL;

  // test hook: candidate vertices examined at each iteration
  std::function<void(int, const std::vector<Vec>&)> on_iteration;
};

/// Invariant monitors accumulated over a run: spectral bounds of the active
/// metric, dual norm of every cut, cut validity and nestedness on sampled
/// slice points, vertex-removal margins and the surrogate-implies-Euclidean
/// implication.
struct AuditSummary {
  double max_spectral_low = 0.0;   // max(0, eps0 - lambda_min(M_k))
  double max_spectral_high = 0.0;  // max(0, lambda_max(M_k) - (eps0 + 1))
  double max_dual_norm_dev = 0.0;
  double max_cut_violation = 0.0;             // sampled slice points vs each cut
  double max_sample_nested_violation = 0.0;   // sampled slice points vs every H-rep
  double max_vertex_nested_violation = 0.0;   // new vertices vs previous H-rep
  double min_removal_margin = std::numeric_limits<double>::infinity();
  double max_removal_identity_dev = 0.0;  // BoundaryPoint mode: |margin - value|
  int surrogate_implication_failures = 0;
  int cuts = 0;
  int slice_samples = 0;
};

struct RunResult {
  RunTrace trace;
  RunStatus status = RunStatus::ConvergedEuclidean;
  int iterations = 0;
  AuditSummary audit;
};

/// One outer-approximation run: single-owner mutable state, never shared.
class Engine {
 public:
  Engine(ProblemSpec problem, RunConfig config);

  RunResult run();

  const Polytope& outer() const { return poly_; }
  const ProblemSpec& problem() const { return problem_; }
  const std::vector<Vec>& probe_directions() const { return probe_dirs_; }
  int iteration() const { return iter_; }

  /// Candidate vertices by LP probes over the stored direction set.
  std::vector<Vec> probe_vertices();

  struct Selection {
    Vec vertex;
    ScalarizationResult result;
    double proxy = 0.0;  // max distance over candidates under the metric
    bool any = false;    // false when every candidate is inside the slice
  };

  enum class StopKind { Continue, ConvergedSurrogate, ConvergedEuclidean };
  StopKind stopping_test(double euclid_max, double surrogate_max) const;
  double surrogate_threshold() const;

 private:
  struct CacheEntry {
    std::optional<ScalarizationResult> euclid;  // M = I
    std::optional<ScalarizationResult> metric;  // fixed or adaptive metric
    int metric_iter = -1;                       // adaptive: iteration of the solve
  };

  std::vector<Vec> candidates_for_iteration(int k, bool& full_used);
  void ensure_euclid_solved(const std::vector<Vec>& cands);
  Selection select_adaptive(const std::vector<Vec>& cands, const SpdMatrix& mk);
  Selection select_from_slot(const std::vector<Vec>& cands, bool metric_slot);
  void audit_cut(const Halfspace& cut, const Vec& vertex, const ScalarizationResult& sel,
                 const SpdMatrix& mk);

  ProblemSpec problem_;
  RunConfig config_;
  double solver_tol_;
  Polytope poly_;
  std::vector<Vec> probe_dirs_;
  MetricState accum_;
  std::map<Vec, CacheEntry> cache_;
  int iter_ = 0;
  AuditSummary audit_;
  std::vector<Vec> validity_samples_;  // 200 slice points, checked against each cut
  std::vector<Vec> nested_samples_;    // 500 slice points, checked against every H-rep
};

RunResult run(const RunConfig& config);
RunResult run(const ProblemSpec& problem, const RunConfig& config);

}  // namespace vopt
