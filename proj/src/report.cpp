#include "layerprobe/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "layerprobe/corpus.hpp"
#include "layerprobe/errors.hpp"

namespace layerprobe::report {

namespace {

// Aligned with corpus::known_constructions(): blues for agree, greens for
// come, warm tones for give.
constexpr std::array<std::string_view, 11> kConstructionPalette = {
    "#1f77b4", "#aec7e8", "#17becf", "#9edae5",  // agree_on/that/to/with
    "#2ca02c", "#98df8a", "#bcbd22",             // come_back/in/out
    "#d62728", "#ff7f0e", "#9467bd", "#e377c2",  // give_away/in/out/up
};

constexpr std::array<std::string_view, 8> kCurvePalette = {
    "#1f77b4", "#2ca02c", "#d62728", "#000000",
    "#ff7f0e", "#9467bd", "#8c564b", "#7f7f7f",
};

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 190;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  // Avoid "-0.00".
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

Range padded(double lo, double hi) {
  if (!(lo <= hi)) return {-1.0, 1.0};
  double span = hi - lo;
  if (span <= 0.0) {
    const double pad = std::max(std::abs(lo) * 0.1, 1e-3);
    return {lo - pad, hi + pad};
  }
  return {lo - 0.05 * span, hi + 0.05 * span};
}

// Plot frame with axis labels and title. Returns the plot-area geometry.
struct Frame {
  double left, top, width, height;
  double x(double v, Range r) const { return left + (v - r.lo) / (r.hi - r.lo) * width; }
  double y(double v, Range r) const { return top + (r.hi - v) / (r.hi - r.lo) * height; }
};

Frame open_svg(std::ostringstream& out, const PlotSpec& spec) {
  Frame f{static_cast<double>(kMarginLeft), static_cast<double>(kMarginTop),
          static_cast<double>(std::max(10, spec.width - kMarginLeft - kMarginRight)),
          static_cast<double>(std::max(10, spec.height - kMarginTop - kMarginBottom))};
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << spec.width << "\" height=\"" << spec.height << "\" viewBox=\"0 0 "
      << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" fill=\"#ffffff\"/>\n"
      << "<text class=\"title\" x=\"" << num(f.left + f.width / 2) << "\" y=\"24\" "
      << "text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title) << "</text>\n"
      << "<g class=\"axes\" stroke=\"#333333\" fill=\"none\">\n"
      << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
      << num(f.width) << "\" height=\"" << num(f.height) << "\"/>\n"
      << "</g>\n"
      << "<text class=\"x-label\" x=\"" << num(f.left + f.width / 2) << "\" y=\""
      << num(f.top + f.height + 42) << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape(spec.x_label) << "</text>\n"
      << "<text class=\"y-label\" transform=\"translate(18 " << num(f.top + f.height / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(spec.y_label)
      << "</text>\n";
  return f;
}

void x_tick(std::ostringstream& out, const Frame& f, double px, const std::string& label) {
  out << "<line x1=\"" << num(px) << "\" y1=\"" << num(f.top + f.height) << "\" x2=\""
      << num(px) << "\" y2=\"" << num(f.top + f.height + 5) << "\" stroke=\"#333333\"/>\n"
      << "<text x=\"" << num(px) << "\" y=\"" << num(f.top + f.height + 18)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << label << "</text>\n";
}

void y_tick(std::ostringstream& out, const Frame& f, double py, const std::string& label) {
  out << "<line x1=\"" << num(f.left - 5) << "\" y1=\"" << num(py) << "\" x2=\""
      << num(f.left) << "\" y2=\"" << num(py) << "\" stroke=\"#333333\"/>\n"
      << "<text x=\"" << num(f.left - 8) << "\" y=\"" << num(py + 3)
      << "\" text-anchor=\"end\" font-size=\"10\">" << label << "</text>\n";
}

void value_ticks(std::ostringstream& out, const Frame& f, Range xr, Range yr,
                 bool with_x) {
  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    const double t = static_cast<double>(i) / (kTicks - 1);
    if (with_x) {
      const double v = xr.lo + t * (xr.hi - xr.lo);
      x_tick(out, f, f.x(v, xr), tick_label(v));
    }
    const double v = yr.lo + t * (yr.hi - yr.lo);
    y_tick(out, f, f.y(v, yr), tick_label(v));
  }
}

void legend_entry(std::ostringstream& out, const Frame& f, int index,
                  std::string_view color, std::string_view name) {
  const double x = f.left + f.width + 16;
  const double y = f.top + 6 + 18.0 * index;
  out << "<g class=\"legend-entry\">"
      << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\""
      << color << "\"/>"
      << "<text x=\"" << num(x + 18) << "\" y=\"" << num(y + 10) << "\" font-size=\"11\">"
      << escape(name) << "</text></g>\n";
}

}  // namespace

std::string_view construction_color(std::string_view construction) {
  const auto& names = corpus::known_constructions();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == construction) return kConstructionPalette[i];
  }
  return "#7f7f7f";
}

std::string file_safe(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "_" : out;
}

std::vector<ScatterPoint> scatter_points(const analysis::LayerProjection& p,
                                         const std::vector<bool>& flagged) {
  const auto& xy = p.result.coordinates;
  if (xy.cols() != 2) {
    throw ValidationError("scatter plot needs 2-D coordinates, got " +
                          std::to_string(xy.cols()) + "-D");
  }
  std::vector<ScatterPoint> out;
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    const auto r = static_cast<std::size_t>(i);
    out.push_back({xy(i, 0), xy(i, 1), p.constructions[r],
                   r < flagged.size() && flagged[r]});
  }
  return out;
}

std::string emit_scatter_svg(const std::vector<ScatterPoint>& points,
                             const PlotSpec& spec) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("scatter plot: non-finite coordinate");
    }
    xlo = std::min(xlo, p.x); xhi = std::max(xhi, p.x);
    ylo = std::min(ylo, p.y); yhi = std::max(yhi, p.y);
  }
  const Range xr = padded(xlo, xhi);
  const Range yr = padded(ylo, yhi);

  std::ostringstream out;
  const Frame f = open_svg(out, spec);
  value_ticks(out, f, xr, yr, true);

  out << "<g class=\"points\">\n";
  for (const auto& p : points) {
    out << "<circle cx=\"" << num(f.x(p.x, xr)) << "\" cy=\"" << num(f.y(p.y, yr))
        << "\" r=\"3.5\" fill=\"" << construction_color(p.construction)
        << "\" fill-opacity=\"0.8\"";
    if (p.flagged) out << " class=\"outlier\" stroke=\"#000000\" stroke-width=\"1.5\"";
    out << "/>\n";
  }
  out << "</g>\n";

  std::vector<std::string_view> present;
  for (auto name : corpus::known_constructions()) {
    if (std::any_of(points.begin(), points.end(),
                    [&](const ScatterPoint& p) { return p.construction == name; })) {
      present.push_back(name);
    }
  }
  std::vector<std::string> other;
  for (const auto& p : points) {
    if (!corpus::is_known_construction(p.construction) &&
        std::find(other.begin(), other.end(), p.construction) == other.end()) {
      other.push_back(p.construction);
    }
  }
  std::sort(other.begin(), other.end());

  out << "<g class=\"legend\">\n";
  int index = 0;
  for (auto name : present) legend_entry(out, f, index++, construction_color(name), name);
  for (const auto& name : other) legend_entry(out, f, index++, construction_color(name), name);
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string emit_curve_svg(const std::vector<analysis::GdvCurve>& curves,
                           const PlotSpec& spec) {
  std::vector<int> layers;
  if (!curves.empty()) {
    for (const auto& p : curves.front().values) layers.push_back(p.layer);
  }
  double ylo = 0.0, yhi = 0.0;
  for (const auto& c : curves) {
    std::vector<int> mine;
    for (const auto& p : c.values) {
      mine.push_back(p.layer);
      if (!std::isfinite(p.gdv)) throw ValidationError("curve plot: non-finite GDV");
      ylo = std::min(ylo, p.gdv);
      yhi = std::max(yhi, p.gdv);
    }
    if (mine != layers) {
      throw ValidationError("curve plot: curve '" + c.grouping.name() +
                            "' does not share the layer domain of the first curve");
    }
  }
  const Range yr = padded(ylo, yhi);
  const Range xr = layers.empty() ? Range{0.0, 1.0}
                                  : Range{layers.front() - 0.5, layers.back() + 0.5};

  std::ostringstream out;
  const Frame f = open_svg(out, spec);
  value_ticks(out, f, xr, yr, false);
  for (int layer : layers) x_tick(out, f, f.x(layer, xr), std::to_string(layer));
  out << "<line class=\"zero\" x1=\"" << num(f.left) << "\" y1=\"" << num(f.y(0.0, yr))
      << "\" x2=\"" << num(f.left + f.width) << "\" y2=\"" << num(f.y(0.0, yr))
      << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";

  out << "<g class=\"curves\">\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto color = kCurvePalette[i % kCurvePalette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& p : curves[i].values) {
      if (!first) out << ' ';
      first = false;
      out << num(f.x(p.layer, xr)) << ',' << num(f.y(p.gdv, yr));
    }
    out << "\"/>\n";
  }
  out << "</g>\n<g class=\"legend\">\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    legend_entry(out, f, static_cast<int>(i), kCurvePalette[i % kCurvePalette.size()],
                 curves[i].grouping.name());
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace layerprobe::report
