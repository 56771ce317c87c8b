#include "pbf/trace.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pbf {

namespace {

const char* const kColumns[] = {"j",          "k",        "serious",     "t",          "theta",      "delta",
                                "step_norm",  "phi",      "bundle_size", "cycle_length", "eps_hat",  "w_hat_norm",
                                "Delta",      "y_dist_prev", "y_dist_new", "x_hat_prev", "x_hat",    "y_hat",
                                "v_hat",      "w_hat",    "moreau_grad", "wall_time"};

std::string format_vec(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

std::string format_opt(const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : std::string(); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s.empty()) return kNaN;
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(ErrorKind::Io, "bad number in trace: '" + s + "'");
  return v;
}

std::optional<std::uint64_t> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(ErrorKind::Io, "bad integer in trace: '" + s + "'");
  return v;
}

Vec parse_vec(const std::string& s) {
  if (s.empty()) return Vec();
  const auto parts = split(s, ';');
  Vec v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trace_header(std::ostream& out, const TraceHeader& header) {
  for (const auto& [key, value] : header) out << "# " << key << " = " << value << '\n';
  bool first = true;
  for (const char* c : kColumns) {
    if (!first) out << ',';
    out << c;
    first = false;
  }
  out << '\n';
}

void write_trace_row(std::ostream& out, const TraceRow& r) {
  out << r.j << ',' << format_opt(r.k) << ',' << (r.serious ? 1 : 0) << ',' << format_double(r.t) << ','
      << format_double(r.theta) << ',' << format_double(r.delta) << ',' << format_double(r.step_norm) << ','
      << format_double(r.phi) << ',' << format_opt(r.bundle_size) << ',' << format_opt(r.cycle_length) << ','
      << format_double(r.eps_hat) << ',' << format_double(r.w_hat_norm) << ',' << format_double(r.Delta) << ','
      << format_double(r.y_dist_prev) << ',' << format_double(r.y_dist_new) << ',' << format_vec(r.x_hat_prev) << ','
      << format_vec(r.x_hat) << ',' << format_vec(r.y_hat) << ',' << format_vec(r.v_hat) << ','
      << format_vec(r.w_hat) << ',' << format_double(r.moreau_grad) << ',' << format_double(r.wall_time) << '\n';
}

std::optional<std::string> TraceFile::get(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return v;
  }
  return std::nullopt;
}

double TraceFile::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) fail(ErrorKind::Io, "trace header lacks '" + key + "'");
  return parse_double(*v);
}

TraceFile read_trace(std::istream& in) {
  TraceFile tf;
  std::string line;
  bool have_columns = false;
  constexpr std::size_t ncols = std::size(kColumns);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      tf.header.emplace_back(trim(line.substr(1, eq - 1)), trim(line.substr(eq + 1)));
      continue;
    }
    auto f = split(line, ',');
    if (!have_columns) {
      if (f.size() != ncols || f[0] != "j") fail(ErrorKind::Io, "trace column header not recognized");
      have_columns = true;
      continue;
    }
    if (f.size() != ncols) fail(ErrorKind::Io, "trace row has " + std::to_string(f.size()) + " fields");
    TraceRow r;
    r.j = parse_opt(f[0]).value_or(0);
    r.k = parse_opt(f[1]);
    r.serious = f[2] == "1";
    r.t = parse_double(f[3]);
    r.theta = parse_double(f[4]);
    r.delta = parse_double(f[5]);
    r.step_norm = parse_double(f[6]);
    r.phi = parse_double(f[7]);
    r.bundle_size = parse_opt(f[8]);
    r.cycle_length = parse_opt(f[9]);
    r.eps_hat = parse_double(f[10]);
    r.w_hat_norm = parse_double(f[11]);
    r.Delta = parse_double(f[12]);
    r.y_dist_prev = parse_double(f[13]);
    r.y_dist_new = parse_double(f[14]);
    r.x_hat_prev = parse_vec(f[15]);
    r.x_hat = parse_vec(f[16]);
    r.y_hat = parse_vec(f[17]);
    r.v_hat = parse_vec(f[18]);
    r.w_hat = parse_vec(f[19]);
    r.moreau_grad = parse_double(f[20]);
    r.wall_time = parse_double(f[21]);
    tf.rows.push_back(std::move(r));
  }
  if (!have_columns) fail(ErrorKind::Io, "trace has no column header");
  return tf;
}

TraceFile read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open trace '" + path + "'");
  return read_trace(in);
}

}  // namespace pbf
