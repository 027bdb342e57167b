#include "gridcomp/harness/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gridcomp/errors.hpp"

namespace gridcomp::harness {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Quotes fields containing separators.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << bytes;
  out.close();
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

const char* axis_label(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::battery_capacity: return "battery capacity C_max (kWh)";
    case SweepAxis::sinr_target: return "SINR target (dB)";
    case SweepAxis::harvest_rate: return "harvest rate (kWh/slot)";
    case SweepAxis::V: return "V / V_max";
  }
  return "";
}

const char* color_of(Algorithm a) {
  switch (a) {
    case Algorithm::twet: return "#1f77b4";
    case Algorithm::mtep: return "#d62728";
    case Algorithm::heu: return "#7f7f7f";
    case Algorithm::offline: return "#2ca02c";
  }
  return "#000000";
}

}  // namespace

std::string format_csv(const ResultTable& table, bool with_runtime) {
  std::string out = kCsvHeader;
  out += '\n';
  const std::string axis(to_string(table.axis));
  for (const auto& r : table.rows) {
    out += axis;
    out += ',' + num(r.axis_value);
    out += ',' + std::to_string(r.seed);
    out += ',' + std::string(to_string(r.algorithm));
    out += ',' + num(r.avg_cost);
    out += ',';
    if (with_runtime) out += num(r.runtime_s);
    out += '\n';
  }
  return out;
}

void write_csv(const ResultTable& table, const std::string& path, bool with_runtime) {
  if (table.rows.empty()) throw InvalidArgument("refusing to write an empty table to '" + path + "'");
  write_file(path, format_csv(table, with_runtime));
}

ResultTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("csv: missing or wrong header");
  ResultTable table;
  bool have_axis = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw FormatError("csv line " + std::to_string(lineno) + ": expected 6 fields");
    SweepAxis axis;
    try {
      axis = parse_axis(f[0]);
    } catch (const InvalidArgument& e) {
      throw FormatError("csv line " + std::to_string(lineno) + ": " + e.what());
    }
    if (have_axis && axis != table.axis) throw FormatError("csv: mixed axes");
    table.axis = axis;
    have_axis = true;
    RunRow r;
    r.axis_value = parse_double(f[1], lineno);
    r.seed = static_cast<int>(parse_double(f[2], lineno));
    try {
      r.algorithm = parse_algorithm(f[3]);
    } catch (const InvalidArgument& e) {
      throw FormatError("csv line " + std::to_string(lineno) + ": " + e.what());
    }
    r.avg_cost = parse_double(f[4], lineno);
    r.ok = std::isfinite(r.avg_cost);
    r.runtime_s = f[5].empty() ? 0.0 : parse_double(f[5], lineno);
    table.rows.push_back(r);
  }
  return table;
}

ResultTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_runs_csv(const ResultTable& table, const std::string& path) {
  if (table.rows.empty()) throw InvalidArgument("refusing to write an empty table to '" + path + "'");
  std::string out =
      "axis_value,seed,algorithm,status,trace_checksum,battery_violations,sinr_violations,cap_violations,"
      "worst_sinr_shortfall,worst_cap_excess,wall_time_s,message\n";
  char hex[24];
  for (const auto& r : table.rows) {
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.trace_checksum));
    out += num(r.axis_value) + ',' + std::to_string(r.seed) + ',' + std::string(to_string(r.algorithm)) + ',' +
           (r.ok ? "ok" : "failed") + ',' + hex + ',' + std::to_string(r.battery_violations) + ',' +
           std::to_string(r.sinr_violations) + ',' + std::to_string(r.cap_violations) + ',' +
           num(r.worst_sinr_shortfall) + ',' + num(r.worst_cap_excess) + ',' + num(r.runtime_s) + ',' +
           csv_field(r.message) + '\n';
  }
  write_file(path, out);
}

void write_aggregate_csv(const std::vector<AggregateRow>& agg, SweepAxis axis, const std::string& path) {
  if (agg.empty()) throw InvalidArgument("refusing to write an empty table to '" + path + "'");
  std::string out = "axis,axis_value,algorithm,count,mean,stderr\n";
  for (const auto& a : agg)
    out += std::string(to_string(axis)) + ',' + num(a.axis_value) + ',' + std::string(to_string(a.algorithm)) +
           ',' + std::to_string(a.count) + ',' + num(a.mean) + ',' + num(a.stderr_) + '\n';
  write_file(path, out);
}

std::string format_svg(const std::vector<AggregateRow>& agg, SweepAxis axis, const std::string& title) {
  constexpr double W = 640, H = 420, L = 70, R = 130, T = 40, B = 55;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  std::map<Algorithm, std::vector<const AggregateRow*>> series;
  for (const auto& a : agg) {
    if (!std::isfinite(a.mean)) continue;
    const double se = std::isfinite(a.stderr_) ? a.stderr_ : 0.0;
    xmin = std::min(xmin, a.axis_value);
    xmax = std::max(xmax, a.axis_value);
    ymin = std::min(ymin, a.mean - se);
    ymax = std::max(ymax, a.mean + se);
    series[a.algorithm].push_back(&a);
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  const double pad = 0.05 * std::max(ymax - ymin, 1e-9);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n"
    << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << short_num(yv)
      << "</text>\n";
  }
  std::vector<double> xs;
  for (const auto& a : agg) xs.push_back(a.axis_value);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double xv : xs)
    s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << short_num(xv)
      << "</text>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(axis_label(axis)) << "</text>\n"
    << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">average cost ($/slot)</text>\n";

  int legend = 0;
  for (const auto& [algo, pts] : series) {
    const char* color = color_of(algo);
    std::ostringstream band, line;
    for (const auto* p : pts)
      band << px(p->axis_value) << ',' << py(p->mean + (std::isfinite(p->stderr_) ? p->stderr_ : 0.0)) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it)
      band << px((*it)->axis_value) << ',' << py((*it)->mean - (std::isfinite((*it)->stderr_) ? (*it)->stderr_ : 0.0))
           << ' ';
    for (const auto* p : pts) line << px(p->axis_value) << ',' << py(p->mean) << ' ';
    s << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n"
      << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    for (const auto* p : pts)
      s << "<circle cx=\"" << px(p->axis_value) << "\" cy=\"" << py(p->mean) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    const double ly = T + 10 + 20 * legend++;
    s << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << to_string(algo) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_svg(const std::vector<AggregateRow>& agg, SweepAxis axis, const std::string& title,
               const std::string& path) {
  if (agg.empty()) throw InvalidArgument("refusing to plot an empty table to '" + path + "'");
  write_file(path, format_svg(agg, axis, title));
}

std::uint64_t content_checksum(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace gridcomp::harness
