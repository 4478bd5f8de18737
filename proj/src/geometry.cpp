#include "layerprobe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "layerprobe/errors.hpp"

namespace layerprobe::geometry {

namespace {

double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

double distance(const RescaledCloud& cloud, Eigen::Index i, Eigen::Index j) {
  return std::sqrt((cloud.points.row(i) - cloud.points.row(j)).squaredNorm());
}

}  // namespace

ClassPartition partition_by_label(std::span<const std::string> labels) {
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    groups[labels[i]].push_back(static_cast<Eigen::Index>(i));
  }
  ClassPartition out;
  for (auto& [name, rows] : groups) {
    out.names.push_back(name);
    out.members.push_back(std::move(rows));
  }
  return out;
}

RescaledCloud rescale_half_zscore(const PointMatrix& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dims = points.cols();
  if (n < 2) throw DegenerateDataError("rescaling needs at least 2 points");

  RescaledCloud out;
  out.points.resize(n, dims);
  out.mean.resize(dims);
  out.stddev.resize(dims);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < dims; ++d) {
    for (Eigen::Index i = 0; i < n; ++i) column[i] = points(i, d);
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    const bool constant = *lo == *hi;
    const double mean = sorted_sum(column) / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dev = points(i, d) - mean;
      column[i] = dev * dev;
    }
    const double stddev =
        constant ? 0.0 : std::sqrt(sorted_sum(column) / static_cast<double>(n));
    out.mean(d) = mean;
    out.stddev(d) = stddev;
    for (Eigen::Index i = 0; i < n; ++i) {
      out.points(i, d) = constant ? 0.0 : 0.5 * (points(i, d) - mean) / stddev;
    }
  }
  return out;
}

double mean_intra_class(const RescaledCloud& cloud,
                        std::span<const Eigen::Index> members,
                        std::string_view class_name) {
  const std::size_t n = members.size();
  if (n < 2) {
    throw DegenerateDataError("class '" + std::string(class_name) + "' has " +
                              std::to_string(n) +
                              " member(s); at least 2 are required");
  }
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d.push_back(distance(cloud, members[i], members[j]));
    }
  }
  return sorted_sum(d) / static_cast<double>(d.size());
}

double mean_inter_class(const RescaledCloud& cloud,
                        std::span<const Eigen::Index> class_l,
                        std::span<const Eigen::Index> class_m) {
  if (class_l.empty() || class_m.empty()) {
    throw DegenerateDataError("inter-class distance of an empty class");
  }
  std::vector<double> d;
  d.reserve(class_l.size() * class_m.size());
  for (auto i : class_l) {
    for (auto j : class_m) d.push_back(distance(cloud, i, j));
  }
  return sorted_sum(d) / static_cast<double>(d.size());
}

SeparabilityReport gdv(const LabeledCloud& cloud) {
  if (static_cast<std::size_t>(cloud.points.rows()) != cloud.labels.size()) {
    throw ValidationError("GDV: " + std::to_string(cloud.points.rows()) +
                          " points but " + std::to_string(cloud.labels.size()) +
                          " labels");
  }
  if (cloud.points.cols() < 1) throw DegenerateDataError("GDV: zero dimensions");

  auto classes = partition_by_label(cloud.labels);
  const std::size_t num_classes = classes.names.size();
  if (num_classes < 2) {
    throw DegenerateDataError("GDV needs at least 2 classes, got " +
                              std::to_string(num_classes));
  }
  std::string degenerate;
  for (std::size_t l = 0; l < num_classes; ++l) {
    if (classes.members[l].size() < 2) {
      if (!degenerate.empty()) degenerate += ", ";
      degenerate += classes.names[l];
    }
  }
  if (!degenerate.empty()) {
    throw DegenerateDataError("GDV: classes with fewer than 2 members: " +
                              degenerate);
  }

  const RescaledCloud rescaled = rescale_half_zscore(cloud.points);

  SeparabilityReport report;
  report.classes = classes.names;
  for (std::size_t l = 0; l < num_classes; ++l) {
    report.intra.push_back(
        mean_intra_class(rescaled, classes.members[l], classes.names[l]));
  }
  for (std::size_t l = 0; l + 1 < num_classes; ++l) {
    for (std::size_t m = l + 1; m < num_classes; ++m) {
      report.inter.push_back(
          {l, m,
           mean_inter_class(rescaled, classes.members[l], classes.members[m])});
    }
  }

  std::vector<double> intra = report.intra;
  std::vector<double> inter;
  for (const auto& e : report.inter) inter.push_back(e.value);
  const double L = static_cast<double>(num_classes);
  const double intra_term = sorted_sum(intra) / L;
  const double inter_term = 2.0 / (L * (L - 1.0)) * sorted_sum(inter);
  report.gdv = (intra_term - inter_term) /
               std::sqrt(static_cast<double>(cloud.points.cols()));
  return report;
}

}  // namespace layerprobe::geometry
