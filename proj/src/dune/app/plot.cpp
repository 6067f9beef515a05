// SPDX-License-Identifier: Apache-2.0
#include "dune/app/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dune/common/error.hpp"

namespace dune::app::plot {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&') o += "&amp;";
    else if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else o += c;
  }
  return o;
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// Blue-white-red for t in [-1, 1].
std::string diverging(double t) {
  t = std::clamp(std::isnan(t) ? 0.0 : t, -1.0, 1.0);
  int r, g, b;
  if (t < 0) {
    r = static_cast<int>(255 * (1 + t));
    g = static_cast<int>(255 * (1 + 0.6 * t));
    b = 255;
  } else {
    r = 255;
    g = static_cast<int>(255 * (1 - 0.6 * t));
    b = static_cast<int>(255 * (1 - t));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

void svg_open(std::ostringstream& os, int w, int h) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string line_panels(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<Panel>& panels) {
  if (panels.empty()) throw UsageError("plot needs at least one panel");
  const int width = 760, ph = 200, top = 40, gap = 40, left = 70, right = 170;
  const int height = top + static_cast<int>(panels.size()) * (ph + gap) + 20;
  std::ostringstream os;
  svg_open(os, width, height);
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : panels[p].series)
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (std::isnan(s.y[k])) continue;
        x0 = std::min(x0, s.x[k]);
        x1 = std::max(x1, s.x[k]);
        y0 = std::min(y0, s.y[k]);
        y1 = std::max(y1, s.y[k]);
      }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const int oy = top + static_cast<int>(p) * (ph + gap);
    const int pw = width - left - right;
    auto X = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return oy + ph - (y - y0) / (y1 - y0) * ph; };
    os << "<g class=\"panel\">\n";
    os << "<text x=\"" << left << "\" y=\"" << oy - 6 << "\" font-size=\"12\">" << esc(panels[p].title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << oy << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double yv = y0 + (y1 - y0) * t / 4.0, xv = x0 + (x1 - x0) * t / 4.0;
      os << "<text x=\"" << left - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
      os << "<text x=\"" << X(xv) << "\" y=\"" << oy + ph + 14 << "\" text-anchor=\"middle\">" << fmt(xv, 6)
         << "</text>\n";
    }
    os << "<text transform=\"translate(16," << oy + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << esc(y_label)
       << "</text>\n";
    for (std::size_t s = 0; s < panels[p].series.size(); ++s) {
      const auto& ser = panels[p].series[s];
      const char* colour = kPalette[s % std::size(kPalette)];
      std::string path;
      bool pen = false;
      for (std::size_t k = 0; k < ser.x.size(); ++k) {
        if (std::isnan(ser.y[k])) {
          pen = false;
          continue;
        }
        path += (pen ? " L" : " M") + fmt(X(ser.x[k]), 7) + ' ' + fmt(Y(ser.y[k]), 7);
        pen = true;
      }
      os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
      os << "<text x=\"" << width - right + 10 << "\" y=\"" << oy + 14 + 14 * static_cast<int>(s) << "\" fill=\""
         << colour << "\">" << esc(ser.label) << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 6 << "\" text-anchor=\"middle\">" << esc(x_label)
     << "</text>\n</svg>\n";
  return os.str();
}

std::string heatmap(const std::string& title, const std::vector<std::string>& rows,
                    const std::vector<std::string>& cols, const std::vector<std::vector<double>>& values) {
  if (values.size() != rows.size()) throw UsageError("heatmap row count mismatch");
  const int cw = 90, ch = 28, left = 190, top = 70;
  const int width = left + cw * static_cast<int>(cols.size()) + 20;
  const int height = top + ch * static_cast<int>(rows.size()) + 20;
  double vmax = 0;
  for (const auto& r : values)
    for (double v : r)
      if (!std::isnan(v)) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0) vmax = 1;
  std::ostringstream os;
  svg_open(os, width, height);
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
  for (std::size_t c = 0; c < cols.size(); ++c)
    os << "<text x=\"" << left + cw * static_cast<int>(c) + cw / 2 << "\" y=\"" << top - 8
       << "\" text-anchor=\"middle\">" << esc(cols[c]) << "</text>\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (values[r].size() != cols.size()) throw UsageError("heatmap column count mismatch");
    const int y = top + ch * static_cast<int>(r);
    os << "<text x=\"" << left - 8 << "\" y=\"" << y + ch / 2 + 4 << "\" text-anchor=\"end\">" << esc(rows[r])
       << "</text>\n";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = values[r][c];
      const int x = left + cw * static_cast<int>(c);
      os << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch
         << "\" fill=\"" << diverging(v / vmax) << "\" stroke=\"white\"/>\n";
      os << "<text x=\"" << x + cw / 2 << "\" y=\"" << y + ch / 2 + 4 << "\" text-anchor=\"middle\">"
         << (std::isnan(v) ? std::string("-") : fmt(v, 4)) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string field_map(const std::string& title, const std::string& caption, const Field& f) {
  const auto& g = *f.grid;
  const int cell = std::max(2, 640 / static_cast<int>(g.n_lon()));
  const int left = 20, top = 40;
  const int width = left * 2 + cell * static_cast<int>(g.n_lon());
  const int height = top + cell * static_cast<int>(g.n_lat()) + 40;
  double vmax = 0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!f.is_missing(k) && std::isfinite(f.values[k])) vmax = std::max(vmax, std::abs(static_cast<double>(f.values[k])));
  if (vmax == 0) vmax = 1;
  std::ostringstream os;
  svg_open(os, width, height);
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
  for (std::size_t i = 0; i < g.n_lat(); ++i)
    for (std::size_t k = 0; k < g.n_lon(); ++k) {
      const std::size_t q = i * g.n_lon() + k;
      const std::string colour = f.is_missing(q) ? "#cccccc" : diverging(f.values[q] / vmax);
      os << "<rect x=\"" << left + cell * static_cast<int>(k) << "\" y=\"" << top + cell * static_cast<int>(i)
         << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << colour << "\"/>\n";
    }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 14 << "\" text-anchor=\"middle\">" << esc(caption)
     << " (colour range +/-" << fmt(vmax) << ")</text>\n</svg>\n";
  return os.str();
}

double cosine_weighted_mean(const Field& f) {
  const auto& g = *f.grid;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.n_lat(); ++i) {
    const double w = std::max(0.0, std::cos(g.lat()[i] * std::numbers::pi / 180.0));
    for (std::size_t k = 0; k < g.n_lon(); ++k) {
      const std::size_t q = i * g.n_lon() + k;
      if (f.is_missing(q)) continue;
      num += w * f.values[q];
      den += w;
    }
  }
  if (den == 0) throw DataError("cosine-weighted mean of an empty field");
  return num / den;
}

}  // namespace dune::app::plot
