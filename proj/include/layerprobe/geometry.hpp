#pragma once

// Generalized Discrimination Value (GDV): a cluster-separability score for
// labeled point clouds. Each dimension is z-scored and halved, then
//
//   GDV = 1/sqrt(D) * ( mean_l intra(C_l) - mean_{l<m} inter(C_l, C_m) )
//
// with intra the mean within-class pairwise Euclidean distance and inter the
// mean cross-class distance. Zero means no separation; more negative means
// stronger separation.
//
// All sums are taken over sorted operands, so the result is bit-identical
// under row reordering and class renaming.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace layerprobe::geometry {

using PointMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LabeledCloud {
  PointMatrix points;  // N x D
  std::vector<std::string> labels;  // length N
};

struct RescaledCloud {
  PointMatrix points;  // s_{n,d} = (x_{n,d} - mean_d) / (2 * stddev_d)
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population; 0 marks a constant dimension
};

/// Classes in lexicographic label order with their member row indices.
struct ClassPartition {
  std::vector<std::string> names;
  std::vector<std::vector<Eigen::Index>> members;
};

ClassPartition partition_by_label(std::span<const std::string> labels);

/// Constant dimensions map to all-zero columns. Requires N >= 2.
RescaledCloud rescale_half_zscore(const PointMatrix& points);

/// Mean distance over the unordered pairs of `members`. Throws
/// DegenerateDataError (naming `class_name`) for fewer than two members.
double mean_intra_class(const RescaledCloud& cloud,
                        std::span<const Eigen::Index> members,
                        std::string_view class_name = "");

/// Mean distance over all cross pairs. Throws DegenerateDataError when a
/// class is empty.
double mean_inter_class(const RescaledCloud& cloud,
                        std::span<const Eigen::Index> class_l,
                        std::span<const Eigen::Index> class_m);

struct InterClassDistance {
  std::size_t l = 0;
  std::size_t m = 0;
  double value = 0.0;
};

struct SeparabilityReport {
  std::vector<std::string> classes;
  std::vector<double> intra;  // aligned with classes
  std::vector<InterClassDistance> inter;  // l < m, row-major pair order
  double gdv = 0.0;
};

/// Throws DegenerateDataError when there are fewer than two classes or any
/// class has fewer than two members (all offending classes are named).
SeparabilityReport gdv(const LabeledCloud& cloud);

}  // namespace layerprobe::geometry
