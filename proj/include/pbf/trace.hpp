#pragma once

#include "pbf/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pbf {

/// One iteration of a solver run. NaN doubles, empty vectors and absent
/// optionals are written as blank CSV fields.
struct TraceRow {
  std::uint64_t j = 0;
  std::optional<std::uint64_t> k;  // cycle index (PBF only)
  bool serious = false;
  double t = kNaN;
  double theta = kNaN;
  double delta = kNaN;
  double step_norm = kNaN;  // ||x_j - prox center||, or ||x_{t+1} - x_t|| for PS
  double phi = kNaN;        // phi at the new iterate
  std::optional<std::uint64_t> bundle_size;

  // serious rows only
  std::optional<std::uint64_t> cycle_length;
  double eps_hat = kNaN;
  double w_hat_norm = kNaN;
  double Delta = kNaN;
  double y_dist_prev = kNaN;  // ||y_k - x_{k-1}||
  double y_dist_new = kNaN;   // ||y_k - x_k||
  Vec x_hat_prev, x_hat, y_hat, v_hat, w_hat;

  double moreau_grad = kNaN;  // measured ||grad M^lambda||, when requested
  double wall_time = kNaN;    // seconds since start, only when timing is on
};

/// Ordered key/value pairs echoed as `# key = value` lines above the CSV.
using TraceHeader = std::vector<std::pair<std::string, std::string>>;

/// 17 significant digits, enough to round-trip every double. NaN is blank.
std::string format_double(double x);

void write_trace_header(std::ostream& out, const TraceHeader& header);
void write_trace_row(std::ostream& out, const TraceRow& row);

struct TraceFile {
  TraceHeader header;
  std::vector<TraceRow> rows;

  std::optional<std::string> get(const std::string& key) const;
  double get_double(const std::string& key) const;  // throws Io when missing
};

TraceFile read_trace(std::istream& in);
TraceFile read_trace_file(const std::string& path);

}  // namespace pbf
