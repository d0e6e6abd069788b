#pragma once

// Dependency-free plot writers: SVG line plots for 1-D solutions and error
// curves, 24-bit BMP heatmaps for 2-D fields.

#include "spinn/math.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>

namespace spinn {

struct LineSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<Real> y;
  bool dashed = false;
};

inline void write_line_svg(const std::string& path, const std::string& title,
                           std::span<const Real> xs, const std::vector<LineSeries>& series,
                           bool log_y = false) {
  const int W = 900, H = 540, ml = 70, mr = 20, mt = 40, mb = 45;
  Real xmin = xs.front(), xmax = xs.back();
  Real ymin = std::numeric_limits<Real>::infinity(), ymax = -ymin;
  for (const auto& s : series)
    for (Real v : s.y) {
      const Real t = log_y ? std::log10(std::max<Real>(v, 1e-300)) : v;
      ymin = std::min(ymin, t);
      ymax = std::max(ymax, t);
    }
  if (!(ymax > ymin)) {
    ymax = ymin + 1.0;
    ymin -= 1.0;
  }
  const Real ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](Real x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](Real y) {
    const Real t = log_y ? std::log10(std::max<Real>(y, 1e-300)) : y;
    return H - mb - (t - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open plot file " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  f << "<rect width='100%' height='100%' fill='white'/>\n";
  f << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
    << "</text>\n";
  // Axes and ticks.
  f << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
    << "' stroke='black'/>\n";
  f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
    << "' stroke='black'/>\n";
  char buf[64];
  for (int i = 0; i <= 5; ++i) {
    const Real x = xmin + (xmax - xmin) * i / 5;
    std::snprintf(buf, sizeof buf, "%.4g", x);
    f << "<text x='" << px(x) << "' y='" << H - mb + 18
      << "' text-anchor='middle' font-size='11'>" << buf << "</text>\n";
    const Real yv = ymin + (ymax - ymin) * i / 5;
    std::snprintf(buf, sizeof buf, "%.3g", log_y ? std::pow(10.0, yv) : yv);
    f << "<text x='" << ml - 6 << "' y='" << H - mb - (H - mt - mb) * i / 5.0 + 4
      << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
  }
  int legend_y = mt + 8;
  for (const auto& s : series) {
    f << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.3'";
    if (s.dashed) f << " stroke-dasharray='6,4'";
    f << " points='";
    for (std::size_t i = 0; i < xs.size() && i < s.y.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(xs[i]), py(s.y[i]));
      f << buf;
    }
    f << "'/>\n";
    f << "<text x='" << W - mr - 160 << "' y='" << legend_y << "' font-size='12' fill='"
      << s.color << "'>" << s.label << "</text>\n";
    legend_y += 16;
  }
  f << "</svg>\n";
}

/// Blue-white-red diverging map over [vmin, vmax].
inline void heat_color(Real t, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
  t = std::clamp(t, 0.0, 1.0);
  if (t < 0.5) {
    const Real u = t * 2.0;
    r = static_cast<std::uint8_t>(255 * (0.23 + 0.77 * u));
    g = static_cast<std::uint8_t>(255 * (0.30 + 0.70 * u));
    b = 255;
  } else {
    const Real u = (t - 0.5) * 2.0;
    r = 255;
    g = static_cast<std::uint8_t>(255 * (1.0 - 0.70 * u));
    b = static_cast<std::uint8_t>(255 * (1.0 - 0.77 * u));
  }
}

/// values row-major [ny][nx]; row 0 is drawn at the bottom.
inline void write_heatmap_bmp(const std::string& path, std::span<const Real> values, int ny,
                              int nx) {
  if (ny * nx != static_cast<int>(values.size()))
    throw std::invalid_argument("heatmap: shape mismatch");
  Real vmin = values[0], vmax = values[0];
  for (Real v : values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (!(vmax > vmin)) vmax = vmin + 1.0;
  const int row_bytes = (nx * 3 + 3) & ~3;
  const std::uint32_t data_size = static_cast<std::uint32_t>(row_bytes) * ny;
  const std::uint32_t file_size = 54 + data_size;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open heatmap file " + path);
  auto u16 = [&f](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  auto u32 = [&f](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  f.write("BM", 2);
  u32(file_size);
  u32(0);
  u32(54);
  u32(40);
  u32(static_cast<std::uint32_t>(nx));
  u32(static_cast<std::uint32_t>(ny));
  u16(1);
  u16(24);
  u32(0);
  u32(data_size);
  u32(2835);
  u32(2835);
  u32(0);
  u32(0);
  std::vector<char> row(row_bytes, 0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      std::uint8_t r, g, b;
      heat_color((values[static_cast<std::size_t>(y) * nx + x] - vmin) / (vmax - vmin), r, g, b);
      row[x * 3] = static_cast<char>(b);
      row[x * 3 + 1] = static_cast<char>(g);
      row[x * 3 + 2] = static_cast<char>(r);
    }
    f.write(row.data(), row_bytes);
  }
}

} // namespace spinn
