#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace vopt {

/// One iteration of a run: Euclidean error, active-metric surrogate,
/// polytope sizes, metric diagnostics and timing. cut_ratio is absent on
/// rows where no cut was made (the terminal row).
struct TraceRow {
  int iter = 0;
  double hausdorff_err = 0.0;
  double surrogate_err = 0.0;
  int n_vertices = 0;
  int n_halfspaces = 0;
  double theta_k = 0.0;
  double lambda_min_sigma = 0.0;
  double lambda_max_sigma = 0.0;
  double selected_vertex_dist = 0.0;
  std::optional<double> cut_ratio;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<std::pair<std::string, std::string>> config;  // emitted as "# key=value"
  std::vector<TraceRow> rows;

  void set_config(const std::string& key, const std::string& value);
  std::string config_value(const std::string& key) const;  // empty if missing
};

extern const char* const kTraceCsvHeader;

/// UTF-8 CSV: "# key=value" comment lines, the fixed header, one row per
/// iteration, floats in shortest round-trip decimal.
void emit_csv(const RunTrace& trace, std::ostream& out);
void emit_csv(const RunTrace& trace, const std::string& path);

RunTrace parse_csv(std::istream& in);
RunTrace parse_csv_file(const std::string& path);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  int k_start = 0;
  int k_end = 0;
  double r_squared = 0.0;
  bool flat = false;  // constant error sequence; slope reported as 0
};

/// OLS of log(err) on log(iter) over the second half of the run
/// (iterations k >= ceil(N/2), N the final iteration), skipping
/// non-positive errors. TooFewPoints if fewer than 4 rows have positive error.
RateFit fit_rate(const RunTrace& trace);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace vopt
