#include "ridgelab/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ridgelab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
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

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t j = 0; j < table.header.size(); ++j) out << (j ? "," : "") << table.header[j];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("CSV row width does not match header");
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << cell_text(row[j]);
    out << '\n';
  }
}

void emit_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream f = open_for_write(path);
  write_csv(f, table);
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (quoted) {
        if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  if (!std::getline(in, line)) return t;
  t.header = split(line);
  while (std::getline(in, line)) {
    std::vector<Cell> row;
    for (const std::string& s : split(line)) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty())
        row.emplace_back(v);
      else
        row.emplace_back(s);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

struct Scale {
  double lo, hi;
  bool log;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Scale make_scale(const std::vector<Series>& series, bool use_x, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Series& s : series)
    for (double v : use_x ? s.x : s.y)
      if (usable(v, log)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) {
    lo = log ? 1.0 : 0.0;
    hi = log ? 10.0 : 1.0;
  }
  if (hi <= lo) {
    const double pad = log ? lo : std::max(1.0, std::abs(lo)) * 0.5;
    hi = log ? lo * 10.0 : lo + pad;
    lo = log ? lo / 10.0 : lo - pad;
  }
  return {lo, hi, log};
}

std::vector<double> ticks(const Scale& s) {
  std::vector<double> t;
  if (s.log) {
    for (double e = std::floor(std::log10(s.lo)); e <= std::ceil(std::log10(s.hi)); e += 1.0) {
      const double v = std::pow(10.0, e);
      if (v >= s.lo * (1 - 1e-12) && v <= s.hi * (1 + 1e-12)) t.push_back(v);
    }
    if (t.size() < 2) t = {s.lo, s.hi};
    return t;
  }
  const double raw = (s.hi - s.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
  for (double v = std::ceil(s.lo / step) * step; v <= s.hi + 1e-9 * step; v += step) t.push_back(v);
  return t;
}

std::string tick_label(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};

}  // namespace

void write_svg_plot(std::ostream& out, const std::vector<Series>& series, const AxisSpec& axes) {
  const double left = 80, right = 190, top = 40, bottom = 60;
  const double W = axes.width, H = axes.height;
  const double x0 = left, x1 = W - right, y0 = H - bottom, y1 = top;
  const Scale xs = make_scale(series, true, axes.log_x);
  const Scale ys = make_scale(series, false, axes.log_y);

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(axes.title) << "</text>\n";
  out << "<g stroke=\"#cccccc\" stroke-width=\"0.5\">\n";
  for (double t : ticks(xs)) {
    const double px = xs.map(t, x0, x1);
    out << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\"" << y1 << "\"/>\n";
  }
  for (double t : ticks(ys)) {
    const double py = ys.map(t, y0, y1);
    out << "<line x1=\"" << x0 << "\" y1=\"" << py << "\" x2=\"" << x1 << "\" y2=\"" << py << "\"/>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(xs))
    out << "<text x=\"" << xs.map(t, x0, x1) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  for (double t : ticks(ys))
    out << "<text x=\"" << x0 - 6 << "\" y=\"" << ys.map(t, y0, y1) + 4 << "\" text-anchor=\"end\">" << tick_label(t)
        << "</text>\n";
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
      << xml_escape(axes.x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (y0 + y1) / 2 << ")\">" << xml_escape(axes.y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "' has mismatched x and y");
    const char* color = s.emphasize ? "black" : kPalette[i % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << (s.emphasize ? 2.5 : 1.2)
        << "\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!usable(s.x[k], axes.log_x) || !usable(s.y[k], axes.log_y)) continue;
      const double px = xs.map(s.x[k], x0, x1);
      const double py = std::clamp(ys.map(s.y[k], y0, y1), y1, y0);
      out << (first ? "" : " ") << format_double(std::round(px * 100) / 100) << ','
          << format_double(std::round(py * 100) / 100);
      first = false;
    }
    out << "\"><title>" << xml_escape(s.label) << "</title></polyline>\n";
    const double ly = y1 + 14 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << x1 + 12 << "\" y1=\"" << ly << "\" x2=\"" << x1 + 36 << "\" y2=\"" << ly << "\" stroke=\""
        << color << "\" stroke-width=\"" << (s.emphasize ? 2.5 : 1.2) << "\"/>\n";
    out << "<text x=\"" << x1 + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_svg_plot(const std::vector<Series>& series, const AxisSpec& axes, const std::filesystem::path& path) {
  std::ofstream f = open_for_write(path);
  write_svg_plot(f, series, axes);
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace ridgelab
