#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

/// Minimal static SVG line and scatter plots of CSV columns.
namespace lrsim::plot {

enum class Style { line, points, step };

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  Style style = Style::line;
  bool dashed = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 800;
  int height = 480;
};

/// Reads two numeric columns (by header name) from a comma-separated file
/// with a header row. Throws DataError if the file is missing, empty, lacks
/// a column or holds a non-numeric cell.
[[nodiscard]] Series read_csv_series(const std::filesystem::path& path, const std::string& x_column,
                                     const std::string& y_column, Style style = Style::line);

/// Header names of a CSV file.
[[nodiscard]] std::vector<std::string> csv_columns(const std::filesystem::path& path);

/// Throws std::invalid_argument if the figure has no points.
[[nodiscard]] std::string render_svg(const Figure& figure);
void save_svg(const std::filesystem::path& path, const Figure& figure);

}  // namespace lrsim::plot
