#pragma once

#include <string>
#include <vector>

namespace feaslab {

/// One plotted curve; `column` names the summary CSV column the data comes
/// from and lands verbatim in the SVG as a data-column attribute.
struct PlotSeries {
  std::string column;
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained vector plot (log-scale y, nonpositive points skipped) plus
/// a plain-text data companion listing every series.
void write_plot(const std::string& svg_path, const std::string& dat_path,
                const std::string& title, const std::string& x_label,
                const std::vector<PlotSeries>& series);

/// Renders the SVG document as a string (exposed for round-trip tests).
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::vector<PlotSeries>& series);
std::string render_dat(const std::vector<PlotSeries>& series);

}  // namespace feaslab
