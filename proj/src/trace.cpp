#include "vopt/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vopt/errors.hpp"

namespace vopt {

const char* const kTraceCsvHeader =
    "iter,hausdorff_err,surrogate_err,n_vertices,n_halfspaces,theta_k,lambda_min_sigma,"
    "lambda_max_sigma,selected_vertex_dist,cut_ratio,wall_ms";

void RunTrace::set_config(const std::string& key, const std::string& value) {
  for (auto& kv : config)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  config.emplace_back(key, value);
}

std::string RunTrace::config_value(const std::string& key) const {
  for (const auto& kv : config)
    if (kv.first == key) return kv.second;
  return {};
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void emit_csv(const RunTrace& trace, std::ostream& out) {
  for (const auto& kv : trace.config) out << "# " << kv.first << "=" << kv.second << "\n";
  out << kTraceCsvHeader << "\n";
  for (const auto& r : trace.rows) {
    out << r.iter << ',' << format_double(r.hausdorff_err) << ',' << format_double(r.surrogate_err)
        << ',' << r.n_vertices << ',' << r.n_halfspaces << ',' << format_double(r.theta_k) << ','
        << format_double(r.lambda_min_sigma) << ',' << format_double(r.lambda_max_sigma) << ','
        << format_double(r.selected_vertex_dist) << ',';
    if (r.cut_ratio) out << format_double(*r.cut_ratio);
    out << ',' << format_double(r.wall_ms) << "\n";
  }
}

void emit_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  emit_csv(trace, f);
  if (!f.good()) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

namespace {

double parse_num(const std::string& field, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    fail(ErrorKind::Io, std::string("bad numeric field for ") + what + ": '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

RunTrace parse_csv(std::istream& in) {
  RunTrace t;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.erase(body.begin());
      auto eq = body.find('=');
      if (eq != std::string::npos) t.config.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != kTraceCsvHeader) fail(ErrorKind::Io, "unexpected CSV header: " + line);
      header_seen = true;
      continue;
    }
    auto f = split_csv(line);
    if (f.size() != 11) fail(ErrorKind::Io, "bad CSV row: " + line);
    TraceRow r;
    r.iter = static_cast<int>(parse_num(f[0], "iter"));
    r.hausdorff_err = parse_num(f[1], "hausdorff_err");
    r.surrogate_err = parse_num(f[2], "surrogate_err");
    r.n_vertices = static_cast<int>(parse_num(f[3], "n_vertices"));
    r.n_halfspaces = static_cast<int>(parse_num(f[4], "n_halfspaces"));
    r.theta_k = parse_num(f[5], "theta_k");
    r.lambda_min_sigma = parse_num(f[6], "lambda_min_sigma");
    r.lambda_max_sigma = parse_num(f[7], "lambda_max_sigma");
    r.selected_vertex_dist = parse_num(f[8], "selected_vertex_dist");
    if (!f[9].empty()) r.cut_ratio = parse_num(f[9], "cut_ratio");
    r.wall_ms = parse_num(f[10], "wall_ms");
    t.rows.push_back(r);
  }
  if (!header_seen) fail(ErrorKind::Io, "missing CSV header");
  return t;
}

RunTrace parse_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return parse_csv(f);
}

RateFit fit_rate(const RunTrace& trace) {
  int positive_rows = 0;
  for (const auto& r : trace.rows)
    if (r.hausdorff_err > 0.0) ++positive_rows;
  if (positive_rows < 4) fail(ErrorKind::TooFewPoints, "need at least 4 rows with positive error");

  const int n_total = trace.rows.back().iter;
  const int k_start = (n_total + 1) / 2;  // ceil(N/2)

  std::vector<double> xs, ys;
  for (const auto& r : trace.rows) {
    if (r.iter < std::max(k_start, 1)) continue;
    if (r.hausdorff_err <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(r.iter)));
    ys.push_back(std::log(r.hausdorff_err));
  }
  if (xs.size() < 2) fail(ErrorKind::TooFewPoints, "fit window has fewer than 2 usable rows");

  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  RateFit fit;
  fit.k_start = k_start;
  fit.k_end = n_total;
  if (std::abs(denom) < 1e-300) {
    fit.flat = true;
    return fit;
  }
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;

  double ss_tot = 0, ss_res = 0;
  const double ymean = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  if (ss_tot < 1e-300) {
    fit.slope = 0.0;
    fit.r_squared = 0.0;
    fit.flat = true;
  } else {
    fit.r_squared = 1.0 - ss_res / ss_tot;
  }
  return fit;
}

}  // namespace vopt
