#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fvc/metrics.hpp"

namespace fvc {

enum class LineStyle { kSolid, kDashed, kDotted };
std::string_view to_string(LineStyle s) noexcept;

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

struct CurveSeries {
  std::string name;
  LineStyle style = LineStyle::kSolid;
  std::vector<CurvePoint> points;
};

enum class PlotKind { kTippett, kDet, kEce };
std::string_view to_string(PlotKind k) noexcept;

// A curve plot as stored in its data file. Rendering depends on nothing else.
struct Figure {
  PlotKind kind = PlotKind::kTippett;
  std::string title;
  std::vector<CurveSeries> series;
};

// Six series: the rising same-speaker curve (proportion <= x), the falling
// different-speakers curve (proportion > x), and for each a dashed copy
// shifted left and right by ci95.
std::vector<CurveSeries> tippett_data(const LRSet& lrs, double ci95);

// Ordinate where the two solid Tippett curves meet, interpolating linearly
// between their shared abscissae.
std::optional<double> tippett_crossing(const CurveSeries& ss_curve,
                                       const CurveSeries& ds_curve);

// ROC convex hull vertices as (P_fa, P_miss). Probit scaling is a rendering
// concern only.
CurveSeries det_data(const LRSet& lrs);

Figure tippett_figure(const LRSet& lrs, double ci95, std::string title);
Figure det_figure(const LRSet& lrs, std::string title);
Figure ece_figure(std::span<const EcePoint> curve, std::string title);

inline constexpr double kCanvasWidth = 800.0;
inline constexpr double kCanvasHeight = 600.0;
// Probit tick positions for DET axes, as probabilities.
inline constexpr double kDetTicks[] = {0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4};

double probit(double p);

std::string render_svg(const Figure& figure);

// Long format "series,style,x,y" preceded by '#' metadata lines.
void write_figure_csv(const Figure& figure, const std::filesystem::path& path);
Figure read_figure_csv(const std::filesystem::path& path);

void write_ece_csv(std::span<const EcePoint> curve, const std::filesystem::path& path);
std::vector<EcePoint> read_ece_csv(const std::filesystem::path& path);

struct SystemMetrics {
  std::string system;
  MetricsReport report;
};

struct AccuracyPrecisionRow {
  std::string system;
  double cllr_mean = 0.0;
  double ci95 = 0.0;
  double cllr_pooled = 0.0;
};

std::vector<AccuracyPrecisionRow> accuracy_precision_data(
    std::span<const SystemMetrics> reports);
std::string render_accuracy_precision_svg(std::span<const AccuracyPrecisionRow> rows);
void write_accuracy_precision_csv(std::span<const AccuracyPrecisionRow> rows,
                                  const std::filesystem::path& path);
std::vector<AccuracyPrecisionRow> read_accuracy_precision_csv(
    const std::filesystem::path& path);

struct RenderedPlot {
  std::filesystem::path image;
  std::filesystem::path data;
};

// Each writes "<stem>.svg" and "<stem>.csv" into dir; the image is rendered
// from the data file's content.
RenderedPlot tippett_render(const LRSet& lrs, double ci95,
                            const std::filesystem::path& dir, std::string_view stem);
RenderedPlot det_render(const LRSet& lrs, const std::filesystem::path& dir,
                        std::string_view stem);
// Throws a consistency error if the PAV series lies above the actual one.
RenderedPlot ece_render(std::span<const EcePoint> curve,
                        const std::filesystem::path& dir, std::string_view stem);
RenderedPlot accuracy_precision_render(std::span<const SystemMetrics> reports,
                                       const std::filesystem::path& dir,
                                       std::string_view stem);

}  // namespace fvc
