#include <cmath>
#include <regex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tabml/core/error.hpp"
#include "tabml/visual/plot.hpp"
#include "xml_check.hpp"

namespace tabml::visual {
namespace {

using testing::XmlProblem;

std::vector<std::pair<double, double>> PolylinePoints(const std::string& svg) {
  std::vector<std::pair<double, double>> out;
  const auto at = svg.find("<polyline");
  if (at == std::string::npos) return out;
  const auto start = svg.find("points=\"", at) + 8;
  const auto end = svg.find('"', start);
  std::stringstream ss(svg.substr(start, end - start));
  std::string pair;
  while (ss >> pair) {
    const auto comma = pair.find(',');
    out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  return out;
}

void ExpectClean(const PlotArtifact& p) {
  EXPECT_EQ(XmlProblem(p.svg), "") << p.svg;
  EXPECT_NE(p.svg.find("viewBox=\"0 0 800 600\""), std::string::npos);
  EXPECT_EQ(p.svg.find("nan"), std::string::npos);
  EXPECT_EQ(p.svg.find("inf"), std::string::npos);
}

TEST(FormatTick, FourSignificantDigits) {
  EXPECT_EQ(FormatTick(0.123456), "0.1235");
  EXPECT_EQ(FormatTick(12345.0), "1.234e+04");
  EXPECT_EQ(FormatTick(2.0), "2");
  EXPECT_EQ(FormatTick(-0.0), "0");
}

TEST(Plot, RocOfPerfectClassifierPassesThroughTopLeft) {
  const auto p = LinePlot(PlotKind::kRocCurve, "roc", "false positive rate", "true positive rate",
                          {{"perfect", {0.0, 0.0, 1.0}, {0.0, 1.0, 1.0}}});
  ExpectClean(p);
  const auto pts = PolylinePoints(p.svg);
  ASSERT_EQ(pts.size(), 3u);
  // (fpr 0, tpr 1) maps to the left edge, top edge of the plot area.
  EXPECT_DOUBLE_EQ(pts[1].first, 90.0);
  EXPECT_DOUBLE_EQ(pts[1].second, 60.0);
  EXPECT_NE(p.svg.find(">false positive rate</text>"), std::string::npos);
  EXPECT_NE(p.svg.find(">true positive rate</text>"), std::string::npos);
}

TEST(Plot, ConfusionHeatmapAnnotatesCells) {
  const auto p = Heatmap(PlotKind::kConfusionHeatmap, "cm", {"a", "b"}, {"a", "b"}, {{2.0, 0.0}, {0.0, 3.0}}, 0.0, 3.0,
                         "predicted class", "true class");
  ExpectClean(p);
  EXPECT_NE(p.svg.find(">2</text>"), std::string::npos);
  EXPECT_NE(p.svg.find(">3</text>"), std::string::npos);
  EXPECT_NE(p.svg.find(">predicted class</text>"), std::string::npos);
}

TEST(Plot, PdpOfIdentityIsMonotone) {
  Vector grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(-1.0 + 0.1 * i);
  const auto p = LinePlot(PlotKind::kPdpCurve, "pdp", "x", "f(x)", {{"", grid, grid}});
  ExpectClean(p);
  const auto pts = PolylinePoints(p.svg);
  ASSERT_EQ(pts.size(), grid.size());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GT(pts[i].first, pts[i - 1].first);
    EXPECT_LT(pts[i].second, pts[i - 1].second);  // svg y grows downward
  }
}

TEST(Plot, TickLabelsAreFormatted) {
  const auto p = LinePlot(PlotKind::kLossCurve, "loss", "epoch", "loss", {{"m", {1.0, 2.0}, {0.3333333, 0.1}}});
  std::regex tick(R"(text-anchor="end">([^<]*)</text>)");
  int count = 0;
  for (auto it = std::sregex_iterator(p.svg.begin(), p.svg.end(), tick); it != std::sregex_iterator(); ++it) {
    const std::string label = (*it)[1];
    EXPECT_EQ(FormatTick(std::stod(label)), label);
    ++count;
  }
  EXPECT_GE(count, 6);
}

TEST(Plot, EscapesText) {
  const auto p = BarPlot(PlotKind::kShapBar, "a < b & \"c\"", "value", {"x<1", "y&z"}, Vector{1.0, -0.5});
  ExpectClean(p);
  EXPECT_NE(p.svg.find("a &lt; b &amp; &quot;c&quot;"), std::string::npos);
}

TEST(Plot, ByteIdentical) {
  Matrix pts(3, 2);
  pts(0, 0) = 1.0;
  pts(1, 1) = 2.0;
  pts(2, 0) = -1.5;
  const std::vector<int> g = {0, 1, -1};
  EXPECT_EQ(ScatterPlot(PlotKind::kPcaScatter, "s", "PC1", "PC2", pts, g).svg,
            ScatterPlot(PlotKind::kPcaScatter, "s", "PC1", "PC2", pts, g).svg);
  ExpectClean(ScatterPlot(PlotKind::kPcaScatter, "s", "PC1", "PC2", pts, g));
}

TEST(Plot, ConstantSeriesStillDrawn) {
  const auto p = LinePlot(PlotKind::kPdpCurve, "flat", "x", "y", {{"", {1.0, 1.0}, {5.0, 5.0}}});
  ExpectClean(p);
}

TEST(Plot, MissingHeatmapCells) {
  const auto p = Heatmap(PlotKind::kCorrelationHeatmap, "corr", {"a", "b"}, {"a", "b"},
                         {{1.0, std::nullopt}, {std::nullopt, 1.0}}, -1.0, 1.0, "feature", "feature");
  ExpectClean(p);
  EXPECT_NE(p.svg.find(">n/a</text>"), std::string::npos);
}

TEST(Plot, IncompatibleSeries) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  EXPECT_EQ(code([] { LinePlot(PlotKind::kLossCurve, "t", "x", "y", {}); }), ErrorCode::kIncompatibleSeries);
  EXPECT_EQ(code([] { LinePlot(PlotKind::kLossCurve, "t", "x", "y", {{"a", {1.0}, {}}}); }),
            ErrorCode::kIncompatibleSeries);
  EXPECT_EQ(code([] { LinePlot(PlotKind::kLossCurve, "t", "x", "y", {{"a", {1.0}, {NAN}}}); }),
            ErrorCode::kIncompatibleSeries);
  EXPECT_EQ(code([] { ScatterPlot(PlotKind::kPcaScatter, "t", "x", "y", Matrix(2, 2), std::vector<int>{0}); }),
            ErrorCode::kIncompatibleSeries);
  EXPECT_EQ(code([] { BarPlot(PlotKind::kShapBar, "t", "v", {"a"}, Vector{}); }), ErrorCode::kIncompatibleSeries);
  EXPECT_EQ(code([] { Heatmap(PlotKind::kConfusionHeatmap, "t", {"a"}, {"a", "b"}, {{1.0}}, 0, 1, "x", "y"); }),
            ErrorCode::kIncompatibleSeries);
}

TEST(XmlCheck, DetectsProblems) {
  EXPECT_EQ(XmlProblem("<svg><g></g></svg>"), "");
  EXPECT_NE(XmlProblem("<svg><g></svg>"), "");
  EXPECT_NE(XmlProblem("<svg a=1></svg>"), "");
  EXPECT_NE(XmlProblem("<svg>a & b</svg>"), "");
}

}  // namespace
}  // namespace tabml::visual
