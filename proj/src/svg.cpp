#include "squall/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "squall/errors.hpp"

namespace squall {

namespace {

const char* kPalette[] = {"#1b6ca8", "#d7263d", "#2a9d34", "#a05cc2",
                          "#e08a00", "#4d4d4d"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void absorb(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  // degenerate and empty ranges widen to something drawable
  void finalize() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double at(double v) const { return (v - lo) / (hi - lo); }
};

// five-stop cold-to-warm ramp
void ramp_color(double t, int rgb[3]) {
  static const int stops[5][3] = {{44, 123, 182},
                                  {171, 217, 233},
                                  {255, 255, 191},
                                  {253, 174, 97},
                                  {215, 25, 28}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double f = t - k;
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<int>(std::lround(stops[k][c] +
                                          f * (stops[k + 1][c] - stops[k][c])));
}

void open_svg(std::string& out, int width, int height,
              const std::string& title) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n", width,
                height);
  out += buf;
  out += "<text x=\"" + fmt(width / 2.0) +
         "\" y=\"22\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"15\">" +
         escape(title) + "</text>\n";
}

}  // namespace

std::string line_plot_svg(const std::string& title,
                          const std::vector<PlotSeries>& series, int width,
                          int height) {
  const double ml = 64, mr = 18, mt = 36, mb = 42;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  Range rx, ry;
  for (const auto& s : series) {
    for (double v : s.x) rx.absorb(v);
    for (double v : s.y) ry.absorb(v);
  }
  rx.finalize();
  ry.finalize();

  std::string out;
  open_svg(out, width, height, title);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%s\" y=\"%s\" width=\"%s\" height=\"%s\" "
                "fill=\"none\" stroke=\"#333333\"/>\n",
                fmt(ml).c_str(), fmt(mt).c_str(), fmt(pw).c_str(),
                fmt(ph).c_str());
  out += buf;
  auto axis_label = [&](double px, double py, const std::string& anchor,
                        double value) {
    out += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(py) + "\" text-anchor=\"" +
           anchor + "\" font-family=\"monospace\" font-size=\"11\">" +
           fmt(value) + "</text>\n";
  };
  axis_label(ml, height - mb + 16, "middle", rx.lo);
  axis_label(width - mr, height - mb + 16, "middle", rx.hi);
  axis_label(ml - 6, height - mb, "end", ry.lo);
  axis_label(ml - 6, mt + 10, "end", ry.hi);

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"";
    const std::size_t count = std::min(s.x.size(), s.y.size());
    for (std::size_t k = 0; k < count; ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      const double px = ml + pw * rx.at(s.x[k]);
      const double py = mt + ph * (1.0 - ry.at(s.y[k]));
      out += fmt(px) + "," + fmt(py) + " ";
    }
    out += "\"/>\n";
    const double ly = mt + 16.0 * (si + 1);
    out += "<text x=\"" + fmt(width - mr - 6) + "\" y=\"" + fmt(ly) +
           "\" text-anchor=\"end\" font-family=\"monospace\" "
           "font-size=\"12\" fill=\"";
    out += color;
    out += "\">" + escape(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string heatmap_svg(const std::string& title, const ScalarField& f,
                        int width, int height) {
  const Mesh& mesh = *f.mesh;
  if (mesh.dim() == 1) {
    PlotSeries s;
    s.name = "value";
    for (int n = 0; n < mesh.node_count(); ++n) {
      s.x.push_back(mesh.node_coords(n)[0]);
      s.y.push_back(f.values[n]);
    }
    return line_plot_svg(title, {s}, width, height);
  }

  const double ml = 56, mr = 18, mt = 36, mb = 52;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  Range rv;
  for (double v : f.values) rv.absorb(v);
  rv.finalize();

  const int nx = mesh.cells_per_axis(0);
  const int ny = mesh.cells_per_axis(1);
  std::string out;
  open_svg(out, width, height, title);
  char buf[256];
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto corners = mesh.cell_corners(mesh.cell_id(i, j));
      double mean = 0.0;
      for (int k = 0; k < 4; ++k) mean += f.values[corners[k]];
      mean *= 0.25;
      int rgb[3];
      ramp_color(rv.at(mean), rgb);
      // SVG y runs downward; cell row 0 sits at the bottom
      const double x = ml + pw * i / nx;
      const double y = mt + ph * (ny - 1 - j) / ny;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%s\" y=\"%s\" width=\"%s\" height=\"%s\" "
                    "fill=\"rgb(%d,%d,%d)\"/>\n",
                    fmt(x).c_str(), fmt(y).c_str(),
                    fmt(pw / nx + 0.5).c_str(), fmt(ph / ny + 0.5).c_str(),
                    rgb[0], rgb[1], rgb[2]);
      out += buf;
    }
  }
  out += "<text x=\"" + fmt(ml) + "\" y=\"" + fmt(height - mb + 18.0) +
         "\" font-family=\"monospace\" font-size=\"11\">min " + fmt(rv.lo) +
         "</text>\n";
  out += "<text x=\"" + fmt(width - mr) + "\" y=\"" +
         fmt(height - mb + 18.0) +
         "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
         "max " +
         fmt(rv.hi) + "</text>\n";
  out += "</svg>\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("short write to " + path);
}

}  // namespace squall
