#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ridgelab {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& out, const Table& table);
void emit_csv(const Table& table, const std::filesystem::path& path);

/// Parses CSV written by write_csv (no quoting support beyond what
/// write_csv produces).
Table read_csv(std::istream& in);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool emphasize = false;  // drawn thicker, e.g. the optimal envelope
};

struct AxisSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 820;
  int height = 520;
};

/// Standalone SVG line plot: one polyline per series and a legend.
void write_svg_plot(std::ostream& out, const std::vector<Series>& series, const AxisSpec& axes);
void emit_svg_plot(const std::vector<Series>& series, const AxisSpec& axes, const std::filesystem::path& path);

}  // namespace ridgelab
