#include "tabml/visual/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tabml/core/error.hpp"

namespace tabml::visual {

std::string_view PlotKindName(PlotKind kind) {
  switch (kind) {
    case PlotKind::kConfusionHeatmap:
      return "confusion_heatmap";
    case PlotKind::kRocCurve:
      return "roc_curve";
    case PlotKind::kPcaScatter:
      return "pca_scatter";
    case PlotKind::kClusterScatter:
      return "cluster_scatter";
    case PlotKind::kPdpCurve:
      return "pdp_curve";
    case PlotKind::kCorrelationHeatmap:
      return "correlation_heatmap";
    case PlotKind::kShapBar:
      return "shap_bar";
    case PlotKind::kLossCurve:
      return "loss_curve";
  }
  return "plot";
}

std::string FormatTick(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 770.0;
constexpr double kTop = 60.0;
constexpr double kBottom = 520.0;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* Color(int group) {
  if (group < 0) return "#999999";
  return kPalette[static_cast<std::size_t>(group) % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string Coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

class Svg {
 public:
  explicit Svg(const std::string& title) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\" "
            "font-family=\"sans-serif\">\n"
         << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    Text(kWidth / 2, 32, title, 18, "middle");
  }

  void Text(double x, double y, std::string_view text, int size, const char* anchor,
            std::optional<double> rotate = std::nullopt) {
    out_ << "<text x=\"" << Coord(x) << "\" y=\"" << Coord(y) << "\" font-size=\"" << size
         << "\" text-anchor=\"" << anchor << "\"";
    if (rotate) out_ << " transform=\"rotate(" << Coord(*rotate) << " " << Coord(x) << " " << Coord(y) << ")\"";
    out_ << ">" << Escape(text) << "</text>\n";
  }

  void Line(double x1, double y1, double x2, double y2, const char* color, double width = 1.0,
            const char* dash = nullptr) {
    out_ << "<line x1=\"" << Coord(x1) << "\" y1=\"" << Coord(y1) << "\" x2=\"" << Coord(x2) << "\" y2=\""
         << Coord(y2) << "\" stroke=\"" << color << "\" stroke-width=\"" << Coord(width) << "\"";
    if (dash) out_ << " stroke-dasharray=\"" << dash << "\"";
    out_ << "/>\n";
  }

  void Rect(double x, double y, double w, double h, const std::string& fill) {
    out_ << "<rect x=\"" << Coord(x) << "\" y=\"" << Coord(y) << "\" width=\"" << Coord(w) << "\" height=\""
         << Coord(h) << "\" fill=\"" << fill << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }

  void Circle(double x, double y, double r, const char* fill) {
    out_ << "<circle cx=\"" << Coord(x) << "\" cy=\"" << Coord(y) << "\" r=\"" << Coord(r) << "\" fill=\"" << fill
         << "\" fill-opacity=\"0.75\"/>\n";
  }

  void Polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out_ << (i ? " " : "") << Coord(pts[i].first) << "," << Coord(pts[i].second);
    }
    out_ << "\"/>\n";
  }

  std::string Finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range Pad(double lo, double hi) {
  if (!(hi > lo)) {
    const double d = std::max(1.0, std::abs(lo)) * 0.5;
    return {lo - d, hi + d};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

double MapX(double v, Range r) { return kLeft + (v - r.lo) / (r.hi - r.lo) * (kRight - kLeft); }
double MapY(double v, Range r) { return kBottom - (v - r.lo) / (r.hi - r.lo) * (kBottom - kTop); }

void Axes(Svg& svg, Range xr, Range yr, const std::string& x_label, const std::string& y_label) {
  svg.Line(kLeft, kBottom, kRight, kBottom, "#333333");
  svg.Line(kLeft, kTop, kLeft, kBottom, "#333333");
  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double px = MapX(xv, xr);
    svg.Line(px, kBottom, px, kBottom + 5, "#333333");
    svg.Text(px, kBottom + 20, FormatTick(xv), 12, "middle");
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    const double py = MapY(yv, yr);
    svg.Line(kLeft - 5, py, kLeft, py, "#333333");
    svg.Text(kLeft - 8, py + 4, FormatTick(yv), 12, "end");
  }
  svg.Text((kLeft + kRight) / 2, kBottom + 50, x_label, 14, "middle");
  svg.Text(28, (kTop + kBottom) / 2, y_label, 14, "middle", -90.0);
}

void Legend(Svg& svg, const std::vector<std::pair<std::string, int>>& entries, bool bottom = false) {
  double y = bottom ? kBottom - 16.0 * static_cast<double>(entries.size()) : kTop + 10;
  for (const auto& [name, group] : entries) {
    svg.Rect(kRight - 220, y - 9, 10, 10, Color(group));
    svg.Text(kRight - 205, y, name, 12, "start");
    y += 16;
  }
}

void RequireFinite(double v, const std::string& what) {
  Require(std::isfinite(v), ErrorCode::kIncompatibleSeries, what + " contains a non-finite value");
}

std::string Blend(double t, const int a[3], const int b[3]) {
  t = std::clamp(t, 0.0, 1.0);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(a[0] + (b[0] - a[0]) * t)),
                static_cast<int>(std::lround(a[1] + (b[1] - a[1]) * t)),
                static_cast<int>(std::lround(a[2] + (b[2] - a[2]) * t)));
  return buf;
}

}  // namespace

PlotArtifact LinePlot(PlotKind kind, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series) {
  Require(!series.empty(), ErrorCode::kIncompatibleSeries, "line plot needs a series");
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    Require(!s.x.empty() && s.x.size() == s.y.size(), ErrorCode::kIncompatibleSeries,
            "series '" + s.name + "' is empty or has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      RequireFinite(s.x[i], s.name);
      RequireFinite(s.y[i], s.name);
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  Range xr = kind == PlotKind::kRocCurve ? Range{0.0, 1.0} : Pad(xlo, xhi);
  Range yr = kind == PlotKind::kRocCurve ? Range{0.0, 1.0} : Pad(ylo, yhi);
  Svg svg(title);
  Axes(svg, xr, yr, x_label, y_label);
  if (kind == PlotKind::kRocCurve) {
    svg.Line(MapX(0, xr), MapY(0, yr), MapX(1, xr), MapY(1, yr), "#999999", 1.0, "4 4");
  }
  std::vector<std::pair<std::string, int>> legend;
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      pts.emplace_back(MapX(series[k].x[i], xr), MapY(series[k].y[i], yr));
    }
    svg.Polyline(pts, Color(static_cast<int>(k)));
    legend.emplace_back(series[k].name, static_cast<int>(k));
  }
  if (series.size() > 1 || !series[0].name.empty()) Legend(svg, legend, kind == PlotKind::kRocCurve);
  return {kind, svg.Finish(), title};
}

PlotArtifact ScatterPlot(PlotKind kind, const std::string& title, const std::string& x_label,
                         const std::string& y_label, const Matrix& points, std::span<const int> groups,
                         const std::vector<std::string>& group_names) {
  Require(points.rows() > 0 && points.cols() >= 2, ErrorCode::kIncompatibleSeries,
          "scatter plot needs n x 2 points");
  Require(groups.size() == points.rows(), ErrorCode::kIncompatibleSeries, "scatter groups do not match points");
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    RequireFinite(points(r, 0), "scatter");
    RequireFinite(points(r, 1), "scatter");
    xlo = std::min(xlo, points(r, 0));
    xhi = std::max(xhi, points(r, 0));
    ylo = std::min(ylo, points(r, 1));
    yhi = std::max(yhi, points(r, 1));
  }
  const Range xr = Pad(xlo, xhi);
  const Range yr = Pad(ylo, yhi);
  Svg svg(title);
  Axes(svg, xr, yr, x_label, y_label);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    svg.Circle(MapX(points(r, 0), xr), MapY(points(r, 1), yr), 3.5, Color(groups[r]));
  }
  std::vector<int> distinct(groups.begin(), groups.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() > 1 || (distinct.size() == 1 && distinct[0] >= 0)) {
    std::vector<std::pair<std::string, int>> legend;
    for (int g : distinct) {
      std::string name = "group " + std::to_string(g);
      if (g < 0) {
        name = "noise";
      } else if (static_cast<std::size_t>(g) < group_names.size()) {
        name = group_names[static_cast<std::size_t>(g)];
      }
      legend.emplace_back(name, g);
    }
    if (legend.size() <= 20) Legend(svg, legend);
  }
  return {kind, svg.Finish(), title};
}

PlotArtifact Heatmap(PlotKind kind, const std::string& title, const std::vector<std::string>& row_labels,
                     const std::vector<std::string>& col_labels,
                     const std::vector<std::vector<std::optional<double>>>& values, double lo, double hi,
                     const std::string& x_label, const std::string& y_label) {
  Require(!values.empty() && values.size() == row_labels.size(), ErrorCode::kIncompatibleSeries,
          "heatmap rows do not match labels");
  for (const auto& row : values) {
    Require(row.size() == col_labels.size() && !row.empty(), ErrorCode::kIncompatibleSeries,
            "heatmap columns do not match labels");
    for (const auto& v : row) {
      if (v) RequireFinite(*v, "heatmap");
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const std::size_t nr = values.size();
  const std::size_t nc = col_labels.size();
  const double left = 170.0;
  const double top = kTop;
  const double w = (kRight - left) / static_cast<double>(nc);
  const double h = (kBottom - 40.0 - top) / static_cast<double>(nr);
  const bool annotate = nr * nc <= 400;
  static const int kWhite[3] = {255, 255, 255};
  static const int kBlue[3] = {33, 102, 172};
  static const int kRed[3] = {178, 24, 43};
  Svg svg(title);
  for (std::size_t i = 0; i < nr; ++i) {
    svg.Text(left - 6, top + h * (static_cast<double>(i) + 0.5) + 4, row_labels[i], 11, "end");
    for (std::size_t j = 0; j < nc; ++j) {
      const double x = left + w * static_cast<double>(j);
      const double y = top + h * static_cast<double>(i);
      const auto& v = values[i][j];
      std::string fill = "#cccccc";
      if (v) {
        if (lo < 0.0) {
          const double mid = 0.0;
          fill = *v >= mid ? Blend(*v / hi, kWhite, kRed) : Blend(*v / lo, kWhite, kBlue);
        } else {
          fill = Blend((*v - lo) / (hi - lo), kWhite, kBlue);
        }
      }
      svg.Rect(x, y, w, h, fill);
      if (annotate) svg.Text(x + w / 2, y + h / 2 + 4, v ? FormatTick(*v) : "n/a", 11, "middle");
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    const double x = left + w * (static_cast<double>(j) + 0.5);
    svg.Text(x, kBottom - 26, col_labels[j], 11, "end", -35.0);
  }
  svg.Text((left + kRight) / 2, kBottom + 50, x_label, 14, "middle");
  svg.Text(28, (kTop + kBottom) / 2, y_label, 14, "middle", -90.0);
  svg.Text(kRight, kBottom + 70, "color scale " + FormatTick(lo) + " to " + FormatTick(hi), 11, "end");
  return {kind, svg.Finish(), title};
}

PlotArtifact BarPlot(PlotKind kind, const std::string& title, const std::string& value_label,
                     const std::vector<std::string>& labels, std::span<const double> values) {
  Require(!labels.empty() && labels.size() == values.size(), ErrorCode::kIncompatibleSeries,
          "bar plot labels do not match values");
  double lo = 0.0;
  double hi = 0.0;
  for (double v : values) {
    RequireFinite(v, "bar plot");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Range xr = hi > lo ? Range{lo, hi + (hi - lo) * 0.05} : Range{0.0, 1.0};
  const double left = 200.0;
  auto map = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * (kRight - left); };
  Svg svg(title);
  const double h = (kBottom - kTop) / static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + h * static_cast<double>(i);
    const double x0 = map(std::min(0.0, values[i]));
    const double x1 = map(std::max(0.0, values[i]));
    svg.Rect(x0, y + h * 0.15, std::max(x1 - x0, 0.5), h * 0.7, Color(0));
    svg.Text(left - 6, y + h / 2 + 4, labels[i], 11, "end");
  }
  svg.Line(left, kBottom, kRight, kBottom, "#333333");
  svg.Line(map(0.0), kTop, map(0.0), kBottom, "#333333");
  for (int i = 0; i <= 5; ++i) {
    const double v = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    svg.Line(map(v), kBottom, map(v), kBottom + 5, "#333333");
    svg.Text(map(v), kBottom + 20, FormatTick(v), 12, "middle");
  }
  svg.Text((left + kRight) / 2, kBottom + 50, value_label, 14, "middle");
  svg.Text(28, (kTop + kBottom) / 2, "feature", 14, "middle", -90.0);
  return {kind, svg.Finish(), title};
}

}  // namespace tabml::visual
