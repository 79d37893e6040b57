#include "vopt/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vopt/errors.hpp"
#include "vopt/parallel.hpp"

namespace vopt {

const char* to_string(NormMode m) {
  switch (m) {
    case NormMode::Euclidean: return "euclid";
    case NormMode::FixedM: return "fixed";
    case NormMode::Adaptive: return "adaptive";
  }
  return "?";
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Full: return "full";
    case Strategy::LpProbe: return "lp";
    case Strategy::Hybrid: return "hybrid";
  }
  return "?";
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ConvergedEuclidean: return "converged-euclidean";
    case RunStatus::ConvergedSurrogate: return "converged-surrogate";
    case RunStatus::MaxIterReached: return "max-iter";
  }
  return "?";
}

namespace {

std::vector<Vec> dedup_sorted(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return lex_less(a, b); });
  std::vector<Vec> out;
  for (const auto& p : pts) {
    bool dup = false;
    for (auto it = out.rbegin(); it != out.rend() && p[0] - (*it)[0] <= kDedupTol; ++it) {
      bool близко = true;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i] - (*it)[i]) > kDedupTol) {
          близко = false;
          break;
        }
      if (близко) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

double derive_solver_tol(double eps) {
  return std::min(1e-9, std::max(1e-12, 0.01 * eps * eps));
}

Polytope initial_polytope(const ProblemSpec& p, double support_tol) {
  std::vector<Halfspace> hs;
  for (int j = 0; j < p.q; ++j) {
    Vec omega = p.cone_G.row(j);
    omega = scaled(omega, 1.0 / norm2(omega));
    WeightedSumResult ws = weighted_sum(p, omega, support_tol);
    hs.emplace_back(omega, ws.support);
  }
  hs.emplace_back(scaled(p.w_bar, -1.0), -p.slice_level);  // cap, in >= form
  Polytope poly(std::move(hs));

  for (int i = 0; i < p.q; ++i) {
    for (int sign = -1; sign <= 1; sign += 2) {
      Vec d(p.q, 0.0);
      d[i] = sign;
      try {
        lp_max(poly, d);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Unbounded)
          fail(ErrorKind::UnboundedInit, "initial polytope unbounded; check slice direction and level");
        throw;
      }
    }
  }
  if (static_cast<int>(poly.vertices().size()) < p.q + 1)
    fail(ErrorKind::UnboundedInit, "initial polytope has too few vertices");
  return poly;
}

std::vector<Vec> initial_probe_directions(const ProblemSpec& p) {
  std::vector<Vec> dirs;
  for (int i = 0; i < p.q; ++i) {
    Vec d(p.q, 0.0);
    d[i] = 1.0;
    dirs.push_back(d);
    d[i] = -1.0;
    dirs.push_back(d);
  }
  Vec w = scaled(p.w_bar, 1.0 / norm2(p.w_bar));
  dirs.push_back(w);
  dirs.push_back(scaled(w, -1.0));
  return dirs;
}

// value comparison with a deterministic lexicographic tie-break; values
// within 1e-12 count as tied
bool better_candidate(double value, const Vec& v, double best, const Vec& best_v) {
  if (value > best + 1e-12) return true;
  if (value >= best - 1e-12 && !best_v.empty() && lex_less(v, best_v)) return true;
  return false;
}

}  // namespace

Engine::Engine(ProblemSpec problem, RunConfig config)
    : problem_(std::move(problem)),
      config_(std::move(config)),
      solver_tol_(derive_solver_tol(config_.eps)),
      poly_(initial_polytope(problem_, 1e-12)),
      probe_dirs_(initial_probe_directions(problem_)),
      accum_(problem_.q, config_.eps0) {
  if (!(config_.eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
  if (config_.max_iter < 1) fail(ErrorKind::InvalidArgument, "max_iter must be at least 1");
  if (config_.hybrid_period < 1) fail(ErrorKind::InvalidArgument, "hybrid period must be at least 1");
  if (config_.norm == NormMode::FixedM && !config_.fixed_m)
    fail(ErrorKind::InvalidArgument, "fixed norm mode needs a matrix");
  if (config_.norm == NormMode::Adaptive && !(config_.eps0 > 0.0))
    fail(ErrorKind::InvalidArgument, "eps0 must be positive");

  std::mt19937_64 rng(config_.audit_seed);
  try {
    for (int i = 0; i < 200; ++i) validity_samples_.push_back(sample_slice_point(problem_, rng));
    for (int i = 0; i < 500; ++i) nested_samples_.push_back(sample_slice_point(problem_, rng));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Capability) throw;
    validity_samples_.clear();
    nested_samples_.clear();
  }
  audit_.slice_samples = static_cast<int>(validity_samples_.size() + nested_samples_.size());
  for (const auto& h : poly_.halfspaces()) {
    for (const auto& y : nested_samples_)
      audit_.max_sample_nested_violation =
          std::max(audit_.max_sample_nested_violation, h.offset - dot(h.normal, y));
    for (const auto& y : validity_samples_)
      audit_.max_sample_nested_violation =
          std::max(audit_.max_sample_nested_violation, h.offset - dot(h.normal, y));
  }
}

std::vector<Vec> Engine::probe_vertices() {
  std::vector<Vec> found(probe_dirs_.size());
  parallel::for_each_index(probe_dirs_.size(), [&](std::size_t i) {
    found[i] = lp_max(poly_, probe_dirs_[i]).vertex;
  });
  return dedup_sorted(std::move(found));
}

std::vector<Vec> Engine::candidates_for_iteration(int k, bool& full_used) {
  const bool full = config_.strategy == Strategy::Full ||
                    (config_.strategy == Strategy::Hybrid && k % config_.hybrid_period == 0);
  full_used = full;
  if (full) return poly_.vertices();
  return probe_vertices();
}

void Engine::ensure_euclid_solved(const std::vector<Vec>& cands) {
  std::vector<const Vec*> missing;
  for (const auto& v : cands) {
    auto& e = cache_[v];
    if (!e.euclid) missing.push_back(&v);
  }
  if (missing.empty()) return;
  SpdMatrix eye = SpdMatrix::identity(problem_.q);
  std::vector<ScalarizationResult> results(missing.size());
  parallel::for_each_index(missing.size(), [&](std::size_t i) {
    results[i] = solve_norm_min(problem_, *missing[i], eye, solver_tol_);
  });
  for (std::size_t i = 0; i < missing.size(); ++i) cache_[*missing[i]].euclid = std::move(results[i]);
}

Engine::Selection Engine::select_from_slot(const std::vector<Vec>& cands, bool metric_slot) {
  Selection sel;
  double best = -1.0;
  Vec best_v;
  const ScalarizationResult* best_r = nullptr;
  for (const auto& v : cands) {
    const auto& e = cache_.at(v);
    const auto& slot = metric_slot ? e.metric : e.euclid;
    if (better_candidate(slot->value, v, best, best_v)) {
      best = slot->value;
      best_v = v;
      best_r = &*slot;
    }
  }
  if (best_r) {
    sel.vertex = best_v;
    sel.result = *best_r;
    sel.proxy = best;
    sel.any = best > kSeparationThreshold;
  }
  return sel;
}

Engine::Selection Engine::select_adaptive(const std::vector<Vec>& cands, const SpdMatrix& mk) {
  // cached displacements stay feasible when the metric changes, so their
  // M_k-norms are upper bounds; re-solve fresh vertices plus the top screen
  // candidates, and fall back to solving everything when the screen cannot
  // certify the argmax
  std::vector<double> upper(cands.size(), 0.0);
  std::vector<char> solved(cands.size(), 0);
  std::vector<std::size_t> mandatory;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    auto& e = cache_.at(cands[i]);
    if (e.metric && e.metric_iter == iter_) {
      solved[i] = 1;
      continue;
    }
    double u = std::numeric_limits<double>::infinity();
    if (e.euclid) u = std::min(u, m_norm(mk, e.euclid->z_star));
    if (e.metric) u = std::min(u, m_norm(mk, e.metric->z_star));
    upper[i] = u;
    if (!e.euclid && !e.metric) mandatory.push_back(i);
  }

  std::vector<std::size_t> screen;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (!solved[i] && std::find(mandatory.begin(), mandatory.end(), i) == mandatory.end())
      screen.push_back(i);
  std::sort(screen.begin(), screen.end(), [&](std::size_t a, std::size_t b) {
    if (upper[a] != upper[b]) return upper[a] > upper[b];
    return lex_less(cands[a], cands[b]);
  });

  auto solve_indices = [&](const std::vector<std::size_t>& idx) {
    std::vector<ScalarizationResult> results(idx.size());
    parallel::for_each_index(idx.size(), [&](std::size_t i) {
      results[i] = solve_norm_min(problem_, cands[idx[i]], mk, solver_tol_);
    });
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto& e = cache_.at(cands[idx[i]]);
      e.metric = std::move(results[i]);
      e.metric_iter = iter_;
      solved[idx[i]] = 1;
    }
  };

  std::vector<std::size_t> first_batch = mandatory;
  for (std::size_t i = 0; i < screen.size() && i < 3; ++i) first_batch.push_back(screen[i]);
  solve_indices(first_batch);

  auto best_solved = [&]() {
    double best = -1.0;
    Vec best_v;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!solved[i]) continue;
      double val = cache_.at(cands[i]).metric->value;
      if (better_candidate(val, cands[i], best, best_v)) {
        best = val;
        best_v = cands[i];
      }
    }
    return std::pair<double, Vec>(best, best_v);
  };

  auto [best, best_v] = best_solved();
  double max_unsolved = 0.0;
  std::vector<std::size_t> unsolved;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (!solved[i]) {
      unsolved.push_back(i);
      max_unsolved = std::max(max_unsolved, upper[i]);
    }
  if (!unsolved.empty() && best < max_unsolved) {
    solve_indices(unsolved);
    std::tie(best, best_v) = best_solved();
  }

  Selection sel;
  sel.vertex = best_v;
  sel.result = *cache_.at(best_v).metric;
  sel.proxy = best;
  sel.any = best > kSeparationThreshold;
  return sel;
}

double Engine::surrogate_threshold() const {
  switch (config_.norm) {
    case NormMode::Euclidean: return config_.eps;
    case NormMode::Adaptive: return std::sqrt(config_.eps0) * config_.eps;
    case NormMode::FixedM: return std::sqrt(config_.fixed_m->lambda_min()) * config_.eps;
  }
  return config_.eps;
}

Engine::StopKind Engine::stopping_test(double euclid_max, double surrogate_max) const {
  if (config_.norm != NormMode::Euclidean && surrogate_max <= surrogate_threshold())
    return StopKind::ConvergedSurrogate;
  if (euclid_max <= config_.eps) return StopKind::ConvergedEuclidean;
  return StopKind::Continue;
}

void Engine::audit_cut(const Halfspace& cut, const Vec& vertex, const ScalarizationResult& sel,
                       const SpdMatrix& mk) {
  ++audit_.cuts;
  audit_.max_dual_norm_dev =
      std::max(audit_.max_dual_norm_dev, std::abs(m_inv_norm(mk, cut.normal) - 1.0));
  for (const auto& y : validity_samples_)
    audit_.max_cut_violation = std::max(audit_.max_cut_violation, cut.offset - dot(cut.normal, y));
  for (const auto& y : nested_samples_)
    audit_.max_sample_nested_violation =
        std::max(audit_.max_sample_nested_violation, cut.offset - dot(cut.normal, y));
  double margin = cut.offset - dot(cut.normal, vertex);
  audit_.min_removal_margin = std::min(audit_.min_removal_margin, margin);
  if (config_.cut_point == CutPoint::BoundaryPoint)
    audit_.max_removal_identity_dev =
        std::max(audit_.max_removal_identity_dev, std::abs(margin - sel.value));
}

RunResult Engine::run() {
  using clock = std::chrono::steady_clock;
  RunResult out;
  RunTrace& trace = out.trace;
  trace.set_config("problem", problem_.name);
  trace.set_config("q", std::to_string(problem_.q));
  trace.set_config("n", std::to_string(problem_.n));
  trace.set_config("norm", to_string(config_.norm));
  trace.set_config("eps", format_double(config_.eps));
  trace.set_config("eps0", format_double(config_.eps0));
  trace.set_config("max_iter", std::to_string(config_.max_iter));
  trace.set_config("strategy", to_string(config_.strategy));
  trace.set_config("hybrid_period", std::to_string(config_.hybrid_period));
  trace.set_config("cut_point", config_.cut_point == CutPoint::ImagePoint ? "image" : "boundary");
  trace.set_config("rate_window", config_.rate_window);
  trace.set_config("solver_tol", format_double(solver_tol_));
  if (config_.fixed_m) {
    std::string m;
    for (int i = 0; i < config_.fixed_m->dim(); ++i)
      for (int j = 0; j < config_.fixed_m->dim(); ++j)
        m += (m.empty() ? "" : " ") + format_double((*config_.fixed_m)(i, j));
    trace.set_config("fixed_m", m);
  }

  const SpdMatrix eye = SpdMatrix::identity(problem_.q);

  for (int k = 0;; ++k) {
    iter_ = k;
    auto t0 = clock::now();

    bool full_used = false;
    std::vector<Vec> cands = candidates_for_iteration(k, full_used);
    if (cands.empty() && !full_used) {
      cands = poly_.vertices();
      full_used = true;
    }
    if (cands.empty()) fail(ErrorKind::NoVertices, "outer approximation has no vertices");
    if (config_.on_iteration) config_.on_iteration(k, cands);

    SpdMatrix mk = config_.norm == NormMode::Adaptive ? accum_.materialize()
                   : config_.norm == NormMode::FixedM ? *config_.fixed_m
                                                      : eye;

    ensure_euclid_solved(cands);
    double e_k = 0.0;
    for (const auto& v : cands) e_k = std::max(e_k, cache_.at(v).euclid->value);

    Selection sel;
    if (config_.norm == NormMode::Euclidean) {
      sel = select_from_slot(cands, false);
    } else if (config_.norm == NormMode::FixedM) {
      std::vector<const Vec*> missing;
      for (const auto& v : cands)
        if (!cache_.at(v).metric) missing.push_back(&v);
      std::vector<ScalarizationResult> results(missing.size());
      parallel::for_each_index(missing.size(), [&](std::size_t i) {
        results[i] = solve_norm_min(problem_, *missing[i], mk, solver_tol_);
      });
      for (std::size_t i = 0; i < missing.size(); ++i) cache_.at(*missing[i]).metric = std::move(results[i]);
      sel = select_from_slot(cands, true);
    } else {
      sel = select_adaptive(cands, mk);
    }

    // degenerate probe set: every candidate already inside the slice while
    // the error is still large; retry once with a full enumeration
    if (!sel.any && e_k > config_.eps && !full_used) {
      cands = poly_.vertices();
      full_used = true;
      ensure_euclid_solved(cands);
      e_k = 0.0;
      for (const auto& v : cands) e_k = std::max(e_k, cache_.at(v).euclid->value);
      sel = config_.norm == NormMode::Adaptive ? select_adaptive(cands, mk)
                                               : select_from_slot(cands, config_.norm != NormMode::Euclidean);
    }

    const double surrogate = (config_.norm == NormMode::Euclidean) ? e_k : sel.proxy;

    Spectral sp = spectral(mk);
    if (config_.norm == NormMode::Adaptive) {
      audit_.max_spectral_low = std::max(audit_.max_spectral_low, config_.eps0 - sp.lambda_min);
      audit_.max_spectral_high =
          std::max(audit_.max_spectral_high, sp.lambda_max - (config_.eps0 + 1.0));
    }

    TraceRow row;
    row.iter = k;
    row.hausdorff_err = e_k;
    row.surrogate_err = surrogate;
    row.n_vertices = static_cast<int>(cands.size());
    row.n_halfspaces = static_cast<int>(poly_.halfspaces().size());
    row.theta_k = sp.theta;
    if (accum_.count() >= 1) {
      auto [smin, smax] = accum_.sigma_stats();
      row.lambda_min_sigma = smin;
      row.lambda_max_sigma = smax;
    }
    row.selected_vertex_dist = sel.proxy;

    StopKind stop = stopping_test(e_k, surrogate);
    if (stop == StopKind::ConvergedSurrogate && e_k > config_.eps) {
      // the surrogate must imply the Euclidean criterion; keep iterating
      ++audit_.surrogate_implication_failures;
      stop = StopKind::Continue;
    }

    if (stop != StopKind::Continue || !sel.any) {
      row.wall_ms =
          std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      trace.rows.push_back(row);
      out.status = (stop == StopKind::ConvergedSurrogate) ? RunStatus::ConvergedSurrogate
                                                          : RunStatus::ConvergedEuclidean;
      out.iterations = k;
      break;
    }
    if (k >= config_.max_iter) {
      row.wall_ms =
          std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      trace.rows.push_back(row);
      out.status = RunStatus::MaxIterReached;
      out.iterations = k;
      break;
    }

    Halfspace cut = extract_cut(sel.result, config_.cut_point);
    Polytope next = intersect(poly_, cut);
    audit_cut(cut, sel.vertex, sel.result, mk);
    for (const auto& nv : next.vertices())
      for (const auto& h : poly_.halfspaces())
        audit_.max_vertex_nested_violation =
            std::max(audit_.max_vertex_nested_violation, h.offset - dot(h.normal, nv));

    if (config_.cut_ratio_diag) {
      double dh = hausdorff_nested(poly_, next);
      row.cut_ratio = dh / e_k;
    }

    poly_ = std::move(next);
    accum_ = accum_.pushed(cut.normal);
    probe_dirs_.push_back(scaled(cut.normal, 1.0 / norm2(cut.normal)));

    row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    trace.rows.push_back(row);
  }

  trace.set_config("status", to_string(out.status));
  trace.set_config("iterations", std::to_string(out.iterations));
  out.audit = audit_;
  if (!config_.trace_path.empty()) emit_csv(trace, config_.trace_path);
  return out;
}

RunResult run(const RunConfig& config) { return run(by_name(config.problem), config); }

RunResult run(const ProblemSpec& problem, const RunConfig& config) {
  Engine engine(problem, config);
  return engine.run();
}

}  // namespace vopt
