#include "layerprobe/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "layerprobe/corpus.hpp"
#include "layerprobe/errors.hpp"

namespace layerprobe::analysis {

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string Grouping::name() const {
  switch (kind) {
    case Kind::by_construction_all: return "all";
    case Kind::by_category: return "by_category";
    case Kind::within_category: return "within_category:" + category;
  }
  return "?";
}

std::vector<Grouping> parse_groupings(std::string_view text) {
  if (text == "all" || text == "by_construction_all") {
    return {Grouping{Grouping::Kind::by_construction_all, {}}};
  }
  if (text == "by_category") return {Grouping{Grouping::Kind::by_category, {}}};
  constexpr std::string_view prefix = "within_category:";
  if (text.starts_with(prefix)) {
    std::vector<Grouping> out;
    std::string_view rest = text.substr(prefix.size());
    while (true) {
      auto comma = rest.find(',');
      auto cat = rest.substr(0, comma);
      if (!corpus::parse_verb_category(cat)) {
        throw ValidationError("unknown verb category '" + std::string(cat) +
                              "' in grouping '" + std::string(text) + "'");
      }
      out.push_back({Grouping::Kind::within_category, std::string(cat)});
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }
  throw ValidationError("unknown grouping '" + std::string(text) +
                        "' (expected all, by_category, within_category:<c>[,<c>])");
}

Selection select(const bundle::EmbeddingBundle& b, const Grouping& grouping) {
  Selection sel;
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const auto& s = b.samples[i];
    switch (grouping.kind) {
      case Grouping::Kind::by_construction_all:
        sel.labels.push_back(s.construction);
        break;
      case Grouping::Kind::by_category:
        sel.labels.push_back(s.verb_category);
        break;
      case Grouping::Kind::within_category:
        if (s.verb_category != grouping.category) continue;
        sel.labels.push_back(s.construction);
        break;
    }
    sel.rows.push_back(static_cast<std::int64_t>(i));
  }
  if (grouping.kind == Grouping::Kind::within_category && sel.rows.empty()) {
    throw ValidationError("grouping " + grouping.name() + ": no samples of category '" +
                          grouping.category + "' in bundle");
  }
  return sel;
}

geometry::LabeledCloud layer_cloud(const bundle::EmbeddingBundle& b, int layer,
                                   const Selection& sel) {
  const auto& m = b.layer(layer);
  geometry::LabeledCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(sel.rows.size()), m.cols());
  for (std::size_t i = 0; i < sel.rows.size(); ++i) {
    cloud.points.row(static_cast<Eigen::Index>(i)) = m.row(sel.rows[i]).cast<double>();
  }
  cloud.labels = sel.labels;
  return cloud;
}

int GdvCurve::argmin_layer() const {
  auto it = std::min_element(values.begin(), values.end(),
                             [](const GdvPoint& a, const GdvPoint& b) { return a.gdv < b.gdv; });
  return it == values.end() ? -1 : it->layer;
}

GdvCurve per_layer_gdv(const bundle::EmbeddingBundle& b, const Grouping& grouping) {
  const Selection sel = select(b, grouping);
  const auto classes = geometry::partition_by_label(sel.labels);
  if (classes.names.size() < 2) {
    std::string names;
    for (const auto& n : classes.names) names += (names.empty() ? "" : ", ") + n;
    throw DegenerateDataError("grouping " + grouping.name() +
                              " has fewer than 2 classes (" + names + ")");
  }
  std::string degenerate;
  for (std::size_t l = 0; l < classes.names.size(); ++l) {
    if (classes.members[l].size() < 2) {
      degenerate += (degenerate.empty() ? "" : ", ") + classes.names[l];
    }
  }
  if (!degenerate.empty()) {
    throw DegenerateDataError("grouping " + grouping.name() +
                              ": classes with fewer than 2 samples: " + degenerate);
  }

  GdvCurve curve{grouping, b.model_id, {}};
  for (int layer : b.layer_indices()) {
    curve.values.push_back({layer, geometry::gdv(layer_cloud(b, layer, sel)).gdv});
  }
  return curve;
}

LayerProjection per_layer_mds(const bundle::EmbeddingBundle& b, int layer,
                              const ProjectionOptions& options) {
  geometry::PointMatrix points = b.layer(layer).cast<double>();
  if (options.rescale_first) points = geometry::rescale_half_zscore(points).points;
  const auto dist = mds::pairwise_distances(points);

  LayerProjection out;
  out.layer = layer;
  out.result = mds::classical_mds(dist, options.k);
  if (options.method == mds::Method::smacof) {
    auto eigenvalues = std::move(out.result.eigenvalues);
    out.result = mds::smacof(dist, out.result.coordinates, options.smacof);
    out.result.eigenvalues = std::move(eigenvalues);
  }
  for (const auto& s : b.samples) {
    out.sample_ids.push_back(s.id);
    out.constructions.push_back(s.construction);
    out.verb_categories.push_back(s.verb_category);
  }
  return out;
}

OutlierFlags flag_outliers(const bundle::EmbeddingBundle& b, int layer,
                           const Grouping& grouping, double k) {
  const Selection sel = select(b, grouping);
  const auto cloud = layer_cloud(b, layer, sel);
  const auto classes = geometry::partition_by_label(sel.labels);

  OutlierFlags flags{layer, grouping, k, {}};
  flags.records.resize(sel.rows.size());
  for (std::size_t c = 0; c < classes.names.size(); ++c) {
    const auto& members = classes.members[c];
    if (members.size() < 2) {
      throw DegenerateDataError("outliers: class '" + classes.names[c] +
                                "' has fewer than 2 samples");
    }
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(cloud.points.cols());
    for (auto i : members) centroid += cloud.points.row(i);
    centroid /= static_cast<double>(members.size());

    std::vector<double> dist;
    for (auto i : members) dist.push_back((cloud.points.row(i) - centroid).norm());
    const double med = median(dist);
    std::vector<double> abs_dev;
    for (double d : dist) abs_dev.push_back(std::abs(d - med));
    const double mad = median(abs_dev);

    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto row = static_cast<std::size_t>(members[m]);
      auto& rec = flags.records[row];
      rec.sample_id = b.samples[static_cast<std::size_t>(sel.rows[row])].id;
      rec.label = classes.names[c];
      rec.distance = dist[m];
      if (mad > 0.0) {
        rec.score = (dist[m] - med) / mad;
      } else {
        rec.score = dist[m] > med ? std::numeric_limits<double>::infinity() : 0.0;
      }
      rec.flagged = dist[m] > med + k * mad;
    }
  }
  return flags;
}

std::string format_float(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                 std::chars_format::general, 6);
  return std::string(buf, end);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string gdv_curves_csv(const std::vector<GdvCurve>& curves) {
  std::ostringstream out;
  out << "model_id,grouping,layer,gdv\n";
  for (const auto& c : curves) {
    for (const auto& p : c.values) {
      out << csv_field(c.model_id) << ',' << c.grouping.name() << ',' << p.layer << ','
          << format_float(p.gdv) << '\n';
    }
  }
  return out.str();
}

std::string mds_csv(const LayerProjection& p) {
  std::ostringstream out;
  out << "sample_id,construction,verb_category,x,y\n";
  const auto& xy = p.result.coordinates;
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    const auto r = static_cast<std::size_t>(i);
    out << csv_field(p.sample_ids[r]) << ',' << p.constructions[r] << ',' << p.verb_categories[r]
        << ',' << format_float(xy(i, 0)) << ','
        << format_float(xy.cols() > 1 ? xy(i, 1) : 0.0) << '\n';
  }
  return out.str();
}

std::string outliers_csv(const std::vector<OutlierFlags>& flags) {
  std::ostringstream out;
  out << "layer,grouping,sample_id,score,flagged\n";
  for (const auto& f : flags) {
    for (const auto& r : f.records) {
      out << f.layer << ',' << f.grouping.name() << ',' << csv_field(r.sample_id) << ','
          << format_float(r.score) << ',' << (r.flagged ? "true" : "false") << '\n';
    }
  }
  return out.str();
}

}  // namespace layerprobe::analysis
