#include "feaslab/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "feaslab/csvio.hpp"
#include "feaslab/errors.hpp"

namespace feaslab {

namespace {

constexpr double kW = 720.0, kH = 480.0;
constexpr double kMarginL = 70.0, kMarginR = 30.0, kMarginT = 40.0, kMarginB = 50.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                         "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

struct Range {
  double lo = 0.0, hi = 1.0;
};

}  // namespace

std::string render_dat(const std::vector<PlotSeries>& series) {
  std::ostringstream os;
  os << "# plot data companion; one block per series\n";
  for (const PlotSeries& s : series) {
    os << "# series: " << s.column << " (" << s.label << ")\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << format_double(s.x[i]) << " " << format_double(s.y[i]) << "\n";
    os << "\n";
  }
  return os.str();
}

std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::vector<PlotSeries>& series) {
  // Log-scale probability axis; collect finite positive points only.
  Range xr{1e300, -1e300}, yr{1e300, -1e300};
  bool any = false;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) continue;
      any = true;
      xr.lo = std::min(xr.lo, s.x[i]);
      xr.hi = std::max(xr.hi, s.x[i]);
      double ly = std::log10(s.y[i]);
      yr.lo = std::min(yr.lo, ly);
      yr.hi = std::max(yr.hi, ly);
    }
  }
  if (!any) {
    xr = {0.0, 1.0};
    yr = {-1.0, 0.0};
  }
  if (xr.hi - xr.lo < 1e-12) {
    xr.lo -= 0.5;
    xr.hi += 0.5;
  }
  if (yr.hi - yr.lo < 1e-12) {
    yr.lo -= 1.0;
    yr.hi += 0.0;
  }
  auto px = [&](double x) {
    return kMarginL + (x - xr.lo) / (xr.hi - xr.lo) * (kW - kMarginL - kMarginR);
  };
  auto py = [&](double ly) {
    return kH - kMarginB - (ly - yr.lo) / (yr.hi - yr.lo) * (kH - kMarginT - kMarginB);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << title << "</text>\n";
  // Axes.
  os << "<line x1=\"" << kMarginL << "\" y1=\"" << kH - kMarginB << "\" x2=\"" << kW - kMarginR
     << "\" y2=\"" << kH - kMarginB << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
     << "\" y2=\"" << kH - kMarginB << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << kH / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << kH / 2
     << ")\">probability (log10)</text>\n";
  // y tick labels at integer log10 values.
  for (int t = static_cast<int>(std::floor(yr.lo)); t <= static_cast<int>(std::ceil(yr.hi)); ++t) {
    if (t < yr.lo - 1e-9 || t > yr.hi + 1e-9) continue;
    os << "<text x=\"" << kMarginL - 8 << "\" y=\"" << py(t) + 4
       << "\" text-anchor=\"end\" font-size=\"10\">1e" << t << "</text>\n";
    os << "<line x1=\"" << kMarginL << "\" y1=\"" << py(t) << "\" x2=\"" << kW - kMarginR
       << "\" y2=\"" << py(t) << "\" stroke=\"#dddddd\"/>\n";
  }

  int ci = 0;
  double legend_y = kMarginT + 6.0;
  for (const PlotSeries& s : series) {
    const char* color = kColors[ci % 10];
    ++ci;
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      pts << px(s.x[i]) << "," << py(std::log10(s.y[i])) << " ";
    }
    os << "<polyline data-column=\"" << s.column << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      os << "<circle data-column=\"" << s.column << "\" cx=\"" << px(s.x[i]) << "\" cy=\""
         << py(std::log10(s.y[i])) << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
    }
    os << "<text x=\"" << kW - kMarginR - 4 << "\" y=\"" << legend_y
       << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << color << "\">" << s.label
       << "</text>\n";
    legend_y += 13.0;
  }
  os << "</svg>\n";
  return os.str();
}

void write_plot(const std::string& svg_path, const std::string& dat_path,
                const std::string& title, const std::string& x_label,
                const std::vector<PlotSeries>& series) {
  std::ofstream svg(svg_path, std::ios::binary | std::ios::trunc);
  if (!svg) throw IoError("cannot open for writing: " + svg_path);
  std::string s = render_svg(title, x_label, series);
  svg.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!svg) throw IoError("write failed: " + svg_path);

  std::ofstream dat(dat_path, std::ios::binary | std::ios::trunc);
  if (!dat) throw IoError("cannot open for writing: " + dat_path);
  std::string d = render_dat(series);
  dat.write(d.data(), static_cast<std::streamsize>(d.size()));
  if (!dat) throw IoError("write failed: " + dat_path);
}

}  // namespace feaslab
