#ifndef TABML_VISUAL_PLOT_HPP_
#define TABML_VISUAL_PLOT_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabml/core/matrix.hpp"

namespace tabml::visual {

enum class PlotKind {
  kConfusionHeatmap,
  kRocCurve,
  kPcaScatter,
  kClusterScatter,
  kPdpCurve,
  kCorrelationHeatmap,
  kShapBar,
  kLossCurve,
};

std::string_view PlotKindName(PlotKind kind);

struct PlotArtifact {
  PlotKind kind = PlotKind::kPdpCurve;
  std::string svg;
  std::string caption;
};

struct Series {
  std::string name;
  Vector x;
  Vector y;
};

// Every plot is an 800x600 SVG with labeled axes; tick labels use 4
// significant digits. Empty or mismatched input throws IncompatibleSeries.

PlotArtifact LinePlot(PlotKind kind, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

// Points are the first two columns of `points`; `groups` picks the color
// (-1 draws grey). Legend entries use `group_names` when given.
PlotArtifact ScatterPlot(PlotKind kind, const std::string& title, const std::string& x_label,
                         const std::string& y_label, const Matrix& points, std::span<const int> groups,
                         const std::vector<std::string>& group_names = {});

// Cells without a value are drawn grey and annotated "n/a". Colors map
// [lo, hi]; a diverging palette is used when lo < 0.
PlotArtifact Heatmap(PlotKind kind, const std::string& title, const std::vector<std::string>& row_labels,
                     const std::vector<std::string>& col_labels,
                     const std::vector<std::vector<std::optional<double>>>& values, double lo, double hi,
                     const std::string& x_label, const std::string& y_label);

// Horizontal bars, one per label, in the given order.
PlotArtifact BarPlot(PlotKind kind, const std::string& title, const std::string& value_label,
                     const std::vector<std::string>& labels, std::span<const double> values);

// Number formatting shared by ticks and annotations: %.4g.
std::string FormatTick(double v);

}  // namespace tabml::visual

#endif  // TABML_VISUAL_PLOT_HPP_
