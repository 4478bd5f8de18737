#pragma once

// Layer-wise experiment over an embedding bundle: GDV curves under a choice
// of labelings, per-layer 2-D projections, and centroid-distance outliers.

#include <string>
#include <string_view>
#include <vector>

#include "layerprobe/bundle.hpp"
#include "layerprobe/geometry.hpp"
#include "layerprobe/mds.hpp"

namespace layerprobe::analysis {

/// Which rows take part and what their class labels are.
///   all                  every sample, labeled by construction
///   within_category:<c>  samples of verb category c, labeled by construction
///   by_category          every sample, labeled by verb category
struct Grouping {
  enum class Kind { by_construction_all, within_category, by_category };
  Kind kind = Kind::by_construction_all;
  std::string category;  // within_category only

  std::string name() const;
  friend bool operator==(const Grouping&, const Grouping&) = default;
};

/// Parses one --grouping value. "within_category:agree,come" expands into
/// one grouping per listed category.
std::vector<Grouping> parse_groupings(std::string_view text);

struct Selection {
  std::vector<std::int64_t> rows;
  std::vector<std::string> labels;
};

/// Throws ValidationError if a within_category grouping names a category
/// with no samples in the bundle.
Selection select(const bundle::EmbeddingBundle& bundle, const Grouping& grouping);

geometry::LabeledCloud layer_cloud(const bundle::EmbeddingBundle& bundle,
                                   int layer, const Selection& selection);

struct GdvPoint {
  int layer = 0;
  double gdv = 0.0;
};

struct GdvCurve {
  Grouping grouping;
  std::string model_id;
  std::vector<GdvPoint> values;  // ascending layer index, one per layer

  int argmin_layer() const;
};

/// Throws DegenerateDataError listing offending classes when the grouping
/// has fewer than two classes or a class with fewer than two samples.
GdvCurve per_layer_gdv(const bundle::EmbeddingBundle& bundle,
                       const Grouping& grouping);

struct ProjectionOptions {
  Eigen::Index k = 2;
  mds::Method method = mds::Method::classical;
  bool rescale_first = false;  // project half-z-scored vectors instead of raw
  mds::SmacofOptions smacof;
};

struct LayerProjection {
  int layer = 0;
  mds::MdsResult result;
  std::vector<std::string> sample_ids;
  std::vector<std::string> constructions;
  std::vector<std::string> verb_categories;
};

LayerProjection per_layer_mds(const bundle::EmbeddingBundle& bundle, int layer,
                              const ProjectionOptions& options = {});

struct OutlierRecord {
  std::string sample_id;
  std::string label;
  double distance = 0.0;  // to the class centroid
  double score = 0.0;     // (distance - median) / MAD within the class
  bool flagged = false;
};

struct OutlierFlags {
  int layer = 0;
  Grouping grouping;
  double k = 3.5;
  std::vector<OutlierRecord> records;  // selection row order
};

/// Flags members whose centroid distance exceeds median + k * MAD of their
/// class. With MAD = 0 the score is 0 at or below the median and +inf above.
OutlierFlags flag_outliers(const bundle::EmbeddingBundle& bundle, int layer,
                           const Grouping& grouping, double k = 3.5);

/// printf("%.6g") with a '.' decimal separator regardless of locale.
std::string format_float(double value);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string_view text);

std::string gdv_curves_csv(const std::vector<GdvCurve>& curves);
std::string mds_csv(const LayerProjection& projection);
std::string outliers_csv(const std::vector<OutlierFlags>& flags);

}  // namespace layerprobe::analysis
