#pragma once

// Deterministic SVG 1.1 plots: MDS scatter plots colored by construction and
// GDV-vs-layer curves.

#include <string>
#include <string_view>
#include <vector>

#include "layerprobe/analysis.hpp"

namespace layerprobe::report {

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 540;
};

/// Fixed color for a canonical construction name, or a category name for
/// curves; grey for anything else.
std::string_view construction_color(std::string_view construction);

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::string construction;
  bool flagged = false;
};

/// One <circle> per point; legend entries are <rect> swatches so circles
/// count points exactly. Flagged points get a black outline.
std::string emit_scatter_svg(const std::vector<ScatterPoint>& points,
                             const PlotSpec& spec);

/// Lifts a projection into scatter points. Throws ValidationError unless the
/// coordinates are two-dimensional.
std::vector<ScatterPoint> scatter_points(const analysis::LayerProjection& projection,
                                         const std::vector<bool>& flagged = {});

/// One <polyline> per curve. More negative GDV is drawn lower. Throws
/// ValidationError if the curves do not share one layer domain.
std::string emit_curve_svg(const std::vector<analysis::GdvCurve>& curves,
                           const PlotSpec& spec);

/// Replaces characters outside [A-Za-z0-9._-] so a model id can be part of a
/// file name.
std::string file_safe(std::string_view name);

}  // namespace layerprobe::report
