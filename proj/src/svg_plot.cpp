#include "lrsim/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lrsim/errors.hpp"
#include "lrsim/series_io.hpp"

namespace lrsim::plot {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

std::string escape(const std::string& s) {
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

/// Round tick spacing covering [lo, hi] with about `target` steps.
double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

constexpr std::array<const char*, 6> kColors{"#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::vector<std::string> csv_columns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header) || header.empty()) throw DataError(path.string() + " is empty");
  return split(header);
}

Series read_csv_series(const std::filesystem::path& path, const std::string& x_column, const std::string& y_column,
                       Style style) {
  const auto cols = csv_columns(path);
  const auto find = [&](const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw DataError(path.string() + " has no column '" + name + "'");
    return static_cast<std::size_t>(it - cols.begin());
  };
  const auto xi = find(x_column);
  const auto yi = find(y_column);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  Series s;
  s.name = y_column;
  s.style = style;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() <= std::max(xi, yi)) throw ParseError(row, "too few columns");
    const auto x = parse_double(cells[xi]);
    const auto y = parse_double(cells[yi]);
    if (!x || !y) throw ParseError(row, "non-numeric value");
    s.x.push_back(*x);
    s.y.push_back(*y);
  }
  if (s.x.empty()) throw DataError(path.string() + " has no data rows");
  return s;
}

std::string render_svg(const Figure& fig) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  std::size_t points = 0;
  for (const auto& s : fig.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
      ++points;
    }
  }
  if (points == 0) throw std::invalid_argument("render_svg: nothing to plot");
  if (xhi == xlo) { xlo -= 0.5; xhi += 0.5; }
  if (yhi == ylo) { ylo -= 0.5; yhi += 0.5; }

  const double left = 70, right = 20, top = 40, bottom = 50;
  const double pw = fig.width - left - right, ph = fig.height - top - bottom;
  const auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
  const auto py = [&](double y) { return top + (yhi - y) / (yhi - ylo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fig.width << "\" height=\"" << fig.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fig.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(fig.title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";

  const double xs = tick_step(xlo, xhi, 8), ys = tick_step(ylo, yhi, 6);
  for (double t = std::ceil(xlo / xs) * xs; t <= xhi + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"#444\"/><text x=\"" << px(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << fmt(t) << "</text>\n";
  }
  for (double t = std::ceil(ylo / ys) * ys; t <= yhi + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
      << "\" stroke=\"#444\"/><text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << fmt(t)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << fig.height - 10 << "\" text-anchor=\"middle\">"
    << escape(fig.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(fig.y_label) << "</text>\n";

  for (std::size_t k = 0; k < fig.series.size(); ++k) {
    const auto& s = fig.series[k];
    const char* color = kColors[k % kColors.size()];
    const std::size_t m = std::min(s.x.size(), s.y.size());
    if (s.style == Style::points) {
      o << "<g fill=\"" << color << "\">\n";
      for (std::size_t i = 0; i < m; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"1.5\"/>\n";
      o << "</g>\n";
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
      for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if (s.style == Style::step && i > 0) o << px(s.x[i]) << ',' << py(s.y[i - 1]) << ' ';
        o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      o << "\"/>\n";
    }
    o << "<text x=\"" << left + pw - 10 << "\" y=\"" << top + 16 + 16 * static_cast<double>(k)
      << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void save_svg(const std::filesystem::path& path, const Figure& figure) {
  const auto svg = render_svg(figure);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << svg;
}

}  // namespace lrsim::plot
